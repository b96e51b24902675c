#include "tma/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "tma/builtins.hpp"
#include "tma/errors.hpp"
#include "tma/presenter.hpp"
#include "tma/service.hpp"
#include "tma/syntax.hpp"

namespace tma {

using json = nlohmann::json;

std::string preference_file() {
  namespace fs = std::filesystem;
  if (const char* dir = std::getenv("TMA_CONFIG_DIR"); dir && *dir) return (fs::path(dir) / "language").string();
  if (const char* xdg = std::getenv("XDG_CONFIG_HOME"); xdg && *xdg) return (fs::path(xdg) / "tma" / "language").string();
  if (const char* home = std::getenv("HOME"); home && *home) return (fs::path(home) / ".config" / "tma" / "language").string();
  return ".tma-language";
}

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string stored_language() {
  std::ifstream in(preference_file());
  std::string tag;
  in >> tag;
  return tag;
}

/// --lang and --lang-dir are needed before the parser exists, to localize help text.
std::optional<std::string> prescan(const std::vector<std::string>& args, const std::string& name) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == name && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(name + "=", 0) == 0) return args[i].substr(name.size() + 1);
  }
  return std::nullopt;
}

struct Context {
  I18n i18n;
  std::string lang;
  std::ostream& out;
  std::ostream& err;

  std::string t(const std::string& key, const Slots& slots = {}) const { return i18n.text(key, lang, slots); }
  std::string t_or(const std::string& key, const std::string& raw) const {
    try {
      return t(key);
    } catch (const UnknownKey&) {
      return raw;
    }
  }
  void warn(const std::vector<Warning>& ws) const {
    for (const auto& w : ws) err << t("cli.warning", {{"message", t(w.code, w.args)}}) << "\n";
  }
  int fail(const std::string& key, const Slots& slots) const {
    err << t("error.prefix", {{"message", t(key, slots)}}) << "\n";
    return kExitError;
  }
};

FormulaKey resolve_ref(const std::string& ref, const std::string& doc_path) {
  if (ref.find('#') != std::string::npos) {
    FormulaKey k = parse_formula_key(ref);
    k.doc_path = normalize_path(k.doc_path);
    return k;
  }
  return FormulaKey{doc_path, CellId{std::stoll(ref)}};
}

Document& ensure_open(Session& s, const std::string& path) {
  if (Document* d = s.document(normalize_path(path))) return *d;
  return s.open_document(path);
}

void print_entry(std::ostream& out, const FormulaEntry& e) {
  out << to_string(e.key) << "\t(" << e.label << ")\t" << format(e.formula, Style::Unicode) << "\n";
}

void dump_tree(const Context& c, const ProofTree& t, int id, int indent) {
  const ProofNode& n = t.nodes.at(id);
  c.out << std::string(2 * indent, ' ') << "#" << n.id << " " << c.t(std::string("node.") + to_string(n.type)) << ": "
        << c.t(std::string("status.") + to_string(n.status));
  if (!n.rule_id.empty()) c.out << " [" << n.rule_id << "]";
  if (n.situation) c.out << "  ⊢ " << format(n.situation->goal, Style::Unicode);
  if (!n.reason.empty() && n.status == NodeStatus::Failed) c.out << " (" << c.t_or("reason." + n.reason, n.reason) << ")";
  c.out << "\n";
  for (int child : n.children) dump_tree(c, t, child, indent + 1);
}

struct ProveOptions {
  std::string document;
  std::string goal;
  std::vector<std::string> kb;
  std::vector<std::string> builtins;
  std::string strategy = kApplyFirst;
  std::vector<std::string> disable;
  std::vector<std::string> priority;
  std::vector<std::string> no_explain;
  std::optional<double> timeout;
  std::optional<int> max_nodes, max_depth;
  bool write_back = false;
  bool progress = false;
};

RuleState& state_of(ProverConfig& cfg, const std::string& id) {
  RuleState& st = cfg.rule_states[id];
  st.rule_id = id;
  return st;
}

int cmd_prove(const Context& c, const ProveOptions& o, const std::string& fmt) {
  Session session;
  Document& doc = session.open_document(o.document);
  const std::string path = doc.path;
  const FormulaKey goal = resolve_ref(o.goal, path);

  std::vector<FormulaKey> kb;
  if (o.kb.empty()) {
    ensure_open(session, goal.doc_path);
    const Document& gdoc = *session.document(goal.doc_path);
    if (!find_cell(gdoc, goal.cell_id)) throw UnknownCellId(to_string(goal));
    const std::size_t goal_pos = document_position(gdoc, goal.cell_id);
    for (const Cell* cell : cells_in_order(gdoc)) {
      if (cell->kind == CellKind::Formula && document_position(gdoc, cell->id) < goal_pos) {
        kb.push_back(FormulaKey{gdoc.path, cell->id});
      }
    }
  } else {
    for (const auto& ref : o.kb) {
      if (ref != "none") kb.push_back(resolve_ref(ref, path));
    }
  }
  ensure_open(session, goal.doc_path);
  c.warn(session.submit_cell(goal.doc_path, goal.cell_id).warnings);
  for (const auto& k : kb) {
    ensure_open(session, k.doc_path);
    c.warn(session.submit_cell(k.doc_path, k.cell_id).warnings);
  }

  ProverConfig cfg;
  cfg.goal = goal;
  cfg.knowledge = {kb.begin(), kb.end()};
  cfg.builtins = {o.builtins.begin(), o.builtins.end()};
  cfg.strategy = o.strategy;
  cfg.language = c.lang;
  for (const auto& id : o.disable) state_of(cfg, id).active = false;
  for (const auto& id : o.no_explain) state_of(cfg, id).explain = false;
  for (const auto& p : o.priority) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw InvalidSnapshot("priority must be written rule=n: " + p);
    int value = 0;
    try {
      value = std::stoi(p.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidSnapshot("priority must be written rule=n: " + p);
    }
    state_of(cfg, p.substr(0, eq)).priority = value;
  }
  if (o.timeout) cfg.limits.timeout_seconds = *o.timeout;
  if (o.max_nodes) cfg.limits.max_nodes = *o.max_nodes;
  if (o.max_depth) cfg.limits.max_depth = *o.max_depth;
  validate_config(cfg);

  const SettingsSnapshot snap = snapshot(cfg, session);
  EventSink sink;
  if (o.progress) sink = [&c](const ProofEvent& e) { c.err << to_json(e).dump() << "\n"; };
  const ProofTree tree = prove(snap, sink);
  const ProofDocument text = render_proof(tree, c.i18n, c.lang);

  if (o.write_back) {
    Document& gdoc = *session.document(goal.doc_path);
    write_back(gdoc, goal.cell_id, make_record("cli", tree, snap, c.i18n, c.lang));
    session.save_document(gdoc.path);
  }

  const std::string status = c.t(std::string("status.") + to_string(tree.status()));
  const std::string reason = c.t_or("reason." + tree.reason, tree.reason);
  if (fmt == "json") {
    c.out << json{{"status", to_string(tree.status())},
                  {"reason", tree.reason},
                  {"tree", tree_to_json(tree)},
                  {"text", to_json(text)},
                  {"snapshot", to_json(snap)}}
                 .dump(2)
          << "\n";
  } else if (fmt == "html") {
    c.out << to_html(text);
  } else {
    c.out << c.t("cli.proof_heading") << "\n" << to_text(text) << "\n";
    c.out << c.t("cli.tree_heading") << "\n";
    dump_tree(c, tree, 0, 1);
    c.out << "\n" << c.t("cli.result", {{"status", status}, {"reason", reason}}) << "\n";
  }
  return tree.proved() ? kExitProved : kExitFailed;
}

int cmd_submit(const Context& c, const std::string& path, const std::string& fmt) {
  Session session;
  const Document& doc = session.open_document(path);
  json all = json::array();
  for (const auto& r : session.submit_document(doc.path)) {
    c.warn(r.warnings);
    if (fmt == "json") all.push_back(entry_to_json(r.entry));
    else print_entry(c.out, r.entry);
  }
  if (fmt == "json") c.out << json{{"formulae", all}}.dump(2) << "\n";
  else if (session.size() == 0) c.err << c.t("cli.no_formulas") << "\n";
  return 0;
}

int cmd_compute(const Context& c, const std::string& expr, const std::vector<std::string>& kb_refs,
                const std::vector<std::string>& builtins, bool trace, int max_steps, const std::string& fmt) {
  Session session;
  std::vector<FormulaEntry> kb;
  for (const auto& ref : kb_refs) {
    if (ref.find('#') != std::string::npos) {
      const FormulaKey k = resolve_ref(ref, "");
      ensure_open(session, k.doc_path);
      kb.push_back(session.submit_cell(k.doc_path, k.cell_id).entry);
    } else {
      const Document& d = ensure_open(session, ref);
      for (const auto& r : session.submit_document(d.path)) kb.push_back(r.entry);
    }
  }
  for (const auto& b : builtins) {
    if (!is_builtin_id(b)) throw InvalidSnapshot("unknown built-in " + b);
  }
  const Formula f = freeze_free_variables(parse_formula(expr));
  const ComputeResult r = compute(f, kb, {builtins.begin(), builtins.end()}, max_steps);
  if (fmt == "json") {
    c.out << compute_to_json(r).dump(2) << "\n";
    return 0;
  }
  if (trace) {
    c.out << c.t("cli.compute_steps") << "\n";
    for (const auto& s : r.trace) {
      std::string pos;
      for (int p : s.position) pos += (pos.empty() ? "" : ".") + std::to_string(p);
      const std::string what = s.kind == "builtin" ? c.t("cli.step_builtin")
                                                   : c.t("cli.step_rewrite", {{"rule", s.rule}, {"position", "[" + pos + "]"}});
      c.out << "  " << format(s.result, Style::Unicode) << "    " << what << "\n";
    }
    c.out << c.t("cli.compute_result") << "\n";
  }
  c.out << format(r.result, Style::Unicode) << "\n";
  return 0;
}

int cmd_archive_save(const Context& c, const std::string& archive, const std::string& document,
                     const std::vector<long long>& serials) {
  Session session;
  const Document& d = session.open_document(document);
  std::set<FormulaKey> keys;
  if (serials.empty()) {
    for (const auto& r : session.submit_document(d.path)) keys.insert(r.entry.key);
  } else {
    for (long long s : serials) keys.insert(session.submit_cell(d.path, CellId{s}).entry.key);
  }
  session.save_archive(keys, archive);
  c.err << c.t("cli.archive_saved", {{"path", archive}, {"count", std::to_string(keys.size())}}) << "\n";
  return 0;
}

int cmd_archive_load(const Context& c, const std::string& archive, const std::string& fmt) {
  Session session;
  const auto entries = session.load_archive(archive);
  json all = json::array();
  for (const auto& e : entries) {
    if (fmt == "json") all.push_back(entry_to_json(e));
    else print_entry(c.out, e);
  }
  if (fmt == "json") c.out << json{{"formulae", all}}.dump(2) << "\n";
  c.err << c.t("cli.archive_loaded", {{"path", archive}, {"count", std::to_string(entries.size())}}) << "\n";
  return 0;
}

int cmd_lang_list(const Context& c, const std::string& fmt) {
  json all = json::array();
  for (const auto& tag : c.i18n.available_languages()) {
    const std::string name = c.i18n.lookup("language.name", tag);
    if (fmt == "json") all.push_back({{"tag", tag}, {"name", name}});
    else c.out << tag << "\t" << name << "\n";
  }
  if (fmt == "json") c.out << json{{"languages", all}}.dump(2) << "\n";
  for (const auto& w : c.i18n.warnings()) c.err << c.t("cli.warning", {{"message", w}}) << "\n";
  return 0;
}

int cmd_lang_set(Context& c, const std::string& tag) {
  if (!c.i18n.has_language(tag)) return c.fail("error.unknown_language", {{"detail", tag}});
  const std::filesystem::path file = preference_file();
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!(out << tag << "\n")) throw IoError("cannot write " + file.string());
  c.lang = tag;
  c.err << c.t("cli.language_set", {{"language", c.i18n.lookup("language.name", tag)}}) << "\n";
  return 0;
}

int cmd_serve(const Context& c, const std::string& addr) {
  ServiceOptions options{c.i18n.directory(), c.lang};
  serve(addr, options, [&](int port) {
    const auto host = parse_address(addr).first;
    c.err << c.t("cli.listening", {{"address", host + ":" + std::to_string(port)}}) << std::endl;
  });
  return 0;
}

void localize(CLI::App& app, const Context& c) {
  auto f = app.get_formatter();
  for (const auto& [label, key] : std::vector<std::pair<std::string, std::string>>{{"Usage", "cli.label.usage"},
                                                                                  {"OPTIONS", "cli.label.options"},
                                                                                  {"Positionals", "cli.label.positionals"},
                                                                                  {"REQUIRED", "cli.label.required"},
                                                                                  {"SUBCOMMAND", "cli.label.subcommand"},
                                                                                  {"SUBCOMMANDS", "cli.label.subcommands"},
                                                                                  {"Env", "cli.label.env"},
                                                                                  {"Needs", "cli.label.needs"},
                                                                                  {"Excludes", "cli.label.excludes"}}) {
    f->label(label, c.t(key));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string lang_dir = prescan(args, "--lang-dir").value_or(env_or("TMA_LANG_DIR", default_lang_dir()));
  std::string lang = prescan(args, "--lang").value_or(env_or("TMA_LANG", stored_language()));
  Context c{I18n(lang_dir), lang.empty() ? "en" : lang, out, err};
  if (!c.i18n.has_language(c.lang)) {
    const std::string bad = c.lang;
    c.lang = "en";
    return c.fail("error.unknown_language", {{"detail", bad}});
  }

  CLI::App app(c.t("cli.description"), "tma");
  localize(app, c);
  app.set_help_flag("-h,--help", c.t("cli.opt.help"));
  app.option_defaults()->group(c.t("cli.group.options"));
  app.require_subcommand(1);
  app.fallthrough();
  std::string ignored_lang, ignored_dir, fmt = "text";
  app.add_option("--lang", ignored_lang, c.t("cli.opt.lang"))->type_name(c.t("cli.type.text"));
  app.add_option("--lang-dir", ignored_dir, c.t("cli.opt.lang_dir"))->type_name(c.t("cli.type.text"));
  app.add_option("--format", fmt, c.t("cli.opt.format"))
      ->type_name(c.t("cli.type.text"))
      ->check(CLI::IsMember({"text", "html", "json"}));

  auto sub = [&](CLI::App& parent, const std::string& name, const std::string& key) {
    CLI::App* s = parent.add_subcommand(name, c.t(key));
    s->group(c.t("cli.group.subcommands"));
    s->set_help_flag("-h,--help", c.t("cli.opt.help"));
    s->fallthrough();
    return s;
  };
  const std::string text = c.t("cli.type.text"), number = c.t("cli.type.number");

  std::string submit_doc;
  CLI::App* submit = sub(app, "submit", "cli.cmd.submit");
  submit->add_option("document", submit_doc, c.t("cli.opt.document"))->required()->type_name(text);

  ProveOptions po;
  CLI::App* prove_cmd = sub(app, "prove", "cli.cmd.prove");
  prove_cmd->add_option("document", po.document, c.t("cli.opt.document"))->required()->type_name(text);
  prove_cmd->add_option("goal", po.goal, c.t("cli.opt.goal"))->required()->type_name(text);
  prove_cmd->add_option("--kb", po.kb, c.t("cli.opt.kb"))->type_name(text);
  prove_cmd->add_option("--builtins", po.builtins, c.t("cli.opt.builtins"))->type_name(text);
  prove_cmd->add_option("--strategy", po.strategy, c.t("cli.opt.strategy"))->type_name(text);
  prove_cmd->add_option("--disable-rule", po.disable, c.t("cli.opt.disable_rule"))->type_name(text);
  prove_cmd->add_option("--priority", po.priority, c.t("cli.opt.priority"))->type_name(text);
  prove_cmd->add_option("--no-explain", po.no_explain, c.t("cli.opt.no_explain"))->type_name(text);
  prove_cmd->add_option("--timeout", po.timeout, c.t("cli.opt.timeout"))->type_name(number);
  prove_cmd->add_option("--max-nodes", po.max_nodes, c.t("cli.opt.max_nodes"))->type_name(number);
  prove_cmd->add_option("--max-depth", po.max_depth, c.t("cli.opt.max_depth"))->type_name(number);
  prove_cmd->add_flag("--write-back", po.write_back, c.t("cli.opt.write_back"));
  prove_cmd->add_flag("--progress", po.progress, c.t("cli.opt.progress"));

  std::string expr;
  std::vector<std::string> compute_kb, compute_builtins;
  bool trace = false;
  int max_steps = 1000;
  CLI::App* compute_cmd = sub(app, "compute", "cli.cmd.compute");
  compute_cmd->add_option("expr", expr, c.t("cli.opt.expr"))->required()->type_name(text);
  compute_cmd->add_option("--kb", compute_kb, c.t("cli.opt.kb_compute"))->type_name(text);
  compute_cmd->add_option("--builtins", compute_builtins, c.t("cli.opt.builtins"))->type_name(text);
  compute_cmd->add_flag("--trace", trace, c.t("cli.opt.trace"));
  compute_cmd->add_option("--max-steps", max_steps, c.t("cli.opt.max_steps"))->type_name(number);

  std::string archive_path, archive_doc;
  std::vector<long long> archive_keys;
  CLI::App* archive = sub(app, "archive", "cli.cmd.archive");
  archive->require_subcommand(1);
  CLI::App* archive_save = sub(*archive, "save", "cli.cmd.archive_save");
  archive_save->add_option("archive", archive_path, c.t("cli.opt.archive"))->required()->type_name(text);
  archive_save->add_option("document", archive_doc, c.t("cli.opt.document"))->required()->type_name(text);
  archive_save->add_option("--keys", archive_keys, c.t("cli.opt.keys"))->type_name(number);
  CLI::App* archive_load = sub(*archive, "load", "cli.cmd.archive_load");
  archive_load->add_option("archive", archive_path, c.t("cli.opt.archive"))->required()->type_name(text);

  std::string tag;
  CLI::App* lang_cmd = sub(app, "lang", "cli.cmd.lang");
  lang_cmd->require_subcommand(1);
  CLI::App* lang_list = sub(*lang_cmd, "list", "cli.cmd.lang_list");
  CLI::App* lang_set = sub(*lang_cmd, "set", "cli.cmd.lang_set");
  lang_set->add_option("tag", tag, c.t("cli.opt.tag"))->required()->type_name(text);

  std::string addr = env_or("TMA_ADDR", "127.0.0.1:8080");
  CLI::App* serve_cmd = sub(app, "serve", "cli.cmd.serve");
  serve_cmd->add_option("--addr", addr, c.t("cli.opt.addr"))->type_name(text);

  std::vector<std::string> argv_store = {"tma"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return c.fail("error.bad_arguments", {{"detail", e.what()}});
  }

  try {
    if (*submit) return cmd_submit(c, submit_doc, fmt);
    if (*prove_cmd) return cmd_prove(c, po, fmt);
    if (*compute_cmd) return cmd_compute(c, expr, compute_kb, compute_builtins, trace, max_steps, fmt);
    if (*archive_save) return cmd_archive_save(c, archive_path, archive_doc, archive_keys);
    if (*archive_load) return cmd_archive_load(c, archive_path, fmt);
    if (*lang_list) return cmd_lang_list(c, fmt);
    if (*lang_set) return cmd_lang_set(c, tag);
    if (*serve_cmd) return cmd_serve(c, addr);
  } catch (const CellParseError& e) {
    return c.fail("error.parse_cell", {{"cell", std::to_string(e.origin().cell_id)},
                                       {"offset", std::to_string(e.span().begin)},
                                       {"end", std::to_string(e.span().end)},
                                       {"detail", e.what()}});
  } catch (const SyntaxError& e) {
    return c.fail("error.parse", {{"offset", std::to_string(e.span().begin)}, {"detail", e.what()}});
  } catch (const UnknownCellId& e) {
    return c.fail("error.unknown_cell", {{"detail", e.what()}});
  } catch (const UnknownId& e) {
    return c.fail("error.unknown_cell", {{"detail", e.what()}});
  } catch (const NotAFormulaCell& e) {
    return c.fail("error.not_a_formula", {{"detail", e.what()}});
  } catch (const InvalidSnapshot& e) {
    return c.fail("error.invalid_settings", {{"detail", e.what()}});
  } catch (const StepLimitExceeded& e) {
    return c.fail("error.step_limit", {{"steps", std::to_string(e.partial().trace.size())}});
  } catch (const IoError& e) {
    return c.fail("error.io", {{"detail", e.what()}});
  } catch (const FormatError& e) {
    return c.fail("error.format", {{"detail", e.what()}});
  } catch (const std::invalid_argument& e) {
    return c.fail("error.bad_arguments", {{"detail", e.what()}});
  } catch (const std::out_of_range& e) {
    return c.fail("error.bad_arguments", {{"detail", e.what()}});
  } catch (const std::filesystem::filesystem_error& e) {
    return c.fail("error.io", {{"detail", e.what()}});
  }
  return kExitError;
}

}  // namespace tma

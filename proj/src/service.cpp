#include "tma/service.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <optional>
#include <thread>

#include "httplib.h"
#include "tma/builtins.hpp"
#include "tma/errors.hpp"
#include "tma/formula_json.hpp"
#include "tma/syntax.hpp"

namespace tma {

using json = nlohmann::json;

json entry_to_json(const FormulaEntry& e) {
  return {{"key", to_string(e.key)},
          {"label", e.label},
          {"formula", format(e.formula, Style::Unicode)},
          {"ascii", format(e.formula, Style::Ascii)},
          {"source", e.source_text},
          {"ast", to_json(e.formula)}};
}

json compute_to_json(const ComputeResult& r) {
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"kind", s.kind}, {"rule", s.rule}, {"position", s.position}, {"result", format(s.result, Style::Unicode)}});
  }
  return {{"result", format(r.result, Style::Unicode)},
          {"ascii", format(r.result, Style::Ascii)},
          {"ast", to_json(r.result)},
          {"trace", trace}};
}

namespace {

struct HttpError : std::runtime_error {
  HttpError(int status, std::string code, std::string key, Slots slots = {})
      : std::runtime_error(code), status(status), code(std::move(code)), key(std::move(key)), slots(std::move(slots)) {}
  int status;
  std::string code;
  std::string key;
  Slots slots;
};

struct Job {
  std::string id;
  SettingsSnapshot snapshot;
  std::mutex m;
  std::condition_variable cv;
  std::vector<ProofEvent> events;
  std::optional<ProofTree> tree;
  std::optional<ProofResultRecord> record;
  bool done = false;
  std::atomic<bool> cancel{false};
  std::thread worker;
};

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return j;
}

std::string required(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) throw std::invalid_argument(std::string("missing field ") + field);
  return j[field].get<std::string>();
}

std::string param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw std::invalid_argument(std::string("missing parameter ") + name);
  return req.get_param_value(name);
}

FormulaKey key_from(const std::string& text) {
  FormulaKey k = parse_formula_key(text);
  k.doc_path = normalize_path(k.doc_path);
  return k;
}

CellId cell_from(const json& v) {
  if (v.is_number_integer()) return CellId{v.get<std::int64_t>()};
  if (v.is_string()) return CellId{std::stoll(v.get<std::string>())};
  throw std::invalid_argument("cell must be a serial number");
}

json keys_json(const std::set<FormulaKey>& keys) {
  json out = json::array();
  for (const auto& k : keys) out.push_back(to_string(k));
  return out;
}

json optional_key(const std::optional<FormulaKey>& k) { return k ? json(to_string(*k)) : json(nullptr); }

SelectionContext context_from(const std::string& s) {
  if (s == "prove") return SelectionContext::Prove;
  if (s == "compute") return SelectionContext::Compute;
  throw HttpError(404, "not_found", "error.bad_request", {{"detail", s}});
}

UnitKind unit_kind_from(const std::string& s) {
  static const std::map<std::string, UnitKind> kinds = {{"formula", UnitKind::Formula},
                                                       {"environment", UnitKind::Environment},
                                                       {"section", UnitKind::Section},
                                                       {"document", UnitKind::Document},
                                                       {"archive", UnitKind::Archive}};
  auto it = kinds.find(s);
  if (it == kinds.end()) throw std::invalid_argument("unknown unit kind " + s);
  return it->second;
}

SelectionUnit unit_from(const std::string& kind, const std::string& path, const std::string& id) {
  SelectionUnit u;
  u.kind = unit_kind_from(kind);
  u.path = normalize_path(path);
  u.id = CellId{id.empty() ? 0 : std::stoll(id)};
  return u;
}

std::string sse_frame(const ProofEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + to_json(e).dump() + "\n\n";
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)), i18n(options.lang_dir), language(options.language) {
    if (!i18n.has_language(language)) language = "en";
  }

  ServiceOptions options;
  I18n i18n;

  std::mutex m;
  Session session;
  std::optional<FormulaKey> candidate, confirmed;
  RuleStates rule_states = default_rule_states();
  std::string strategy = kApplyFirst;
  Limits limits;
  std::string language;
  int next_proof = 1;
  std::map<std::string, std::shared_ptr<Job>> proofs;
  std::vector<std::shared_ptr<Job>> started;
  std::atomic<bool> stopping{false};

  std::string current_language() {
    std::lock_guard lk(m);
    return language;
  }

  ProverConfig config() const {
    ProverConfig c;
    c.goal = confirmed;
    c.knowledge = session.selection(SelectionContext::Prove);
    c.builtins = session.builtin_selection(SelectionContext::Prove);
    c.rule_states = rule_states;
    c.strategy = strategy;
    c.limits = limits;
    c.language = language;
    return c;
  }

  Document& document(const std::string& path) {
    Document* d = session.document(normalize_path(path));
    if (!d) throw HttpError(404, "unknown_document", "error.unknown_document", {{"detail", path}});
    return *d;
  }

  std::shared_ptr<Job> job(const std::string& id) {
    std::lock_guard lk(m);
    auto it = proofs.find(id);
    if (it == proofs.end()) throw HttpError(404, "unknown_proof", "error.unknown_proof", {{"detail", id}});
    return it->second;
  }

  json goal_json() const { return {{"candidate", optional_key(candidate)}, {"confirmed", optional_key(confirmed)}}; }

  json rules_json() const {
    json out = json::array();
    for (const auto& r : rule_list()) out.push_back(to_json(rule_states.at(r.id)));
    return out;
  }

  json warnings_json(const std::vector<Warning>& ws) const {
    json out = json::array();
    for (const auto& w : ws) out.push_back({{"code", w.code}, {"message", i18n.text(w.code, language, w.args)}});
    return out;
  }

  void validate_builtins(const json& ids) const {
    for (const auto& id : ids) {
      if (!id.is_string() || !is_builtin_id(id.get<std::string>())) {
        throw HttpError(422, "invalid_settings", "error.invalid_settings", {{"detail", id.dump()}});
      }
    }
  }

  static json tree_of(Job& j) {
    std::lock_guard lk(j.m);
    return j.tree ? tree_to_json(*j.tree) : tree_to_json(replay(j.events));
  }

  json proof_summary(Job& j) {
    std::lock_guard lk(j.m);
    json out = {{"proof_id", j.id}, {"goal", to_string(j.snapshot.goal.key)}, {"done", j.done}};
    if (j.tree) {
      out["status"] = to_string(j.tree->status());
      out["reason"] = j.tree->reason;
    } else {
      out["status"] = to_string(NodeStatus::Pending);
    }
    if (j.record) out["record"] = to_json(*j.record);
    return out;
  }

  void run(const std::shared_ptr<Job>& j) {
    auto sink = [j](const ProofEvent& e) {
      std::lock_guard lk(j->m);
      j->events.push_back(e);
      j->cv.notify_all();
    };
    ProofTree tree;
    try {
      tree = prove(j->snapshot, sink, &j->cancel);
    } catch (const std::exception&) {
      tree.reason = "cancelled";
    }
    std::optional<ProofResultRecord> record;
    {
      std::lock_guard lk(m);
      if (!tree.nodes.empty()) {
        record = make_record(j->id, tree, j->snapshot, i18n, language);
        if (Document* d = session.document(j->snapshot.goal.key.doc_path)) {
          try {
            write_back(*d, j->snapshot.goal.key.cell_id, *record);
          } catch (const UnknownCellId&) {
          }
        }
      }
    }
    std::lock_guard lk(j->m);
    j->tree = std::move(tree);
    j->record = std::move(record);
    j->done = true;
    j->cv.notify_all();
  }

  template <class F>
  void respond(httplib::Response& res, F&& body) {
    auto fail = [&](int status, const std::string& code, const std::string& key, const Slots& slots, json extra = json::object()) {
      const std::string lang = current_language();
      extra["code"] = code;
      extra["message"] = i18n.text("error.prefix", lang, {{"message", i18n.text(key, lang, slots)}});
      res.status = status;
      res.set_content(json{{"error", extra}}.dump(), "application/json");
    };
    try {
      json out = body();
      res.set_content(out.dump(), "application/json");
    } catch (const HttpError& e) {
      fail(e.status, e.code, e.key, e.slots);
    } catch (const CellParseError& e) {
      fail(422, "parse_error", "error.parse", {{"offset", std::to_string(e.span().begin)}, {"detail", e.what()}},
           {{"span", {{"begin", e.span().begin}, {"end", e.span().end}}},
            {"expected", e.expected()},
            {"cell", e.origin().cell_id}});
    } catch (const ParseError& e) {
      fail(422, "parse_error", "error.parse", {{"offset", std::to_string(e.span().begin)}, {"detail", e.what()}},
           {{"span", {{"begin", e.span().begin}, {"end", e.span().end}}}, {"expected", e.expected()}});
    } catch (const SyntaxError& e) {
      fail(422, "parse_error", "error.parse", {{"offset", std::to_string(e.span().begin)}, {"detail", e.what()}},
           {{"span", {{"begin", e.span().begin}, {"end", e.span().end}}}});
    } catch (const UnknownCellId& e) {
      fail(404, "unknown_cell", "error.unknown_cell", {{"detail", e.what()}});
    } catch (const UnknownId& e) {
      fail(404, "not_found", "error.unknown_cell", {{"detail", e.what()}});
    } catch (const NotAFormulaCell& e) {
      fail(422, "not_a_formula", "error.not_a_formula", {{"detail", e.what()}});
    } catch (const InvalidSnapshot& e) {
      fail(422, "invalid_settings", "error.invalid_settings", {{"detail", e.what()}});
    } catch (const StepLimitExceeded& e) {
      fail(422, "step_limit", "error.step_limit", {{"steps", std::to_string(e.partial().trace.size())}},
           {{"partial", compute_to_json(e.partial())}});
    } catch (const IoError& e) {
      fail(404, "io", "error.io", {{"detail", e.what()}});
    } catch (const FormatError& e) {
      fail(422, "format", "error.format", {{"detail", e.what()}});
    } catch (const json::exception& e) {
      fail(400, "bad_request", "error.bad_request", {{"detail", e.what()}});
    } catch (const std::invalid_argument& e) {
      fail(400, "bad_request", "error.bad_request", {{"detail", e.what()}});
    } catch (const std::out_of_range& e) {
      fail(400, "bad_request", "error.bad_request", {{"detail", e.what()}});
    }
  }

  void install(httplib::Server& s);
};

void Service::Impl::install(httplib::Server& s) {
  const std::string api = "/api/v1";

  // ------------------------------------------------------------ documents

  s.Get(api + "/documents", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      json out = json::array();
      for (const auto& [path, doc] : session.documents()) {
        out.push_back({{"path", path}, {"cells", cells_in_order(doc).size()}});
      }
      return json{{"documents", out}};
    });
  });

  s.Post(api + "/documents/open", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = required(body_of(req), "path");
      std::lock_guard lk(m);
      const Document& d = session.open_document(path);
      return json{{"path", d.path}, {"document", document_to_json(d)}};
    });
  });

  s.Get(api + "/document", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = param(req, "path");
      std::lock_guard lk(m);
      const Document& d = document(path);
      return json{{"path", d.path}, {"document", document_to_json(d)}};
    });
  });

  s.Post(api + "/documents/save", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = required(body_of(req), "path");
      std::lock_guard lk(m);
      const Document& d = document(path);
      session.save_document(d.path);
      return json{{"path", d.path}};
    });
  });

  s.Post(api + "/submit", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      const std::string path = required(b, "path");
      const CellId cell = cell_from(b.at("cell"));
      std::lock_guard lk(m);
      const std::string doc = document(path).path;
      auto r = session.submit_cell(doc, cell);
      return json{{"entry", entry_to_json(r.entry)}, {"warnings", warnings_json(r.warnings)}};
    });
  });

  s.Post(api + "/submit-document", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = required(body_of(req), "path");
      std::lock_guard lk(m);
      const std::string doc = document(path).path;
      json out = json::array();
      for (const auto& r : session.submit_document(doc)) {
        out.push_back({{"entry", entry_to_json(r.entry)}, {"warnings", warnings_json(r.warnings)}});
      }
      return json{{"results", out}};
    });
  });

  s.Get(api + "/declarations", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = param(req, "path");
      const CellId cell{std::stoll(param(req, "cell"))};
      std::lock_guard lk(m);
      const std::string doc = document(path).path;
      json out = json::array();
      for (const auto& d : session.declarations_at(doc, cell)) {
        json item = {{"text", format(d, Style::Unicode)}};
        if (d.origin) item["origin"] = {{"path", d.origin->doc_path}, {"cell", d.origin->cell_id}};
        out.push_back(item);
      }
      return json{{"declarations", out}};
    });
  });

  s.Get(api + "/formulae", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      json out = json::array();
      for (const auto& e : session.all_formulae()) out.push_back(entry_to_json(e));
      return json{{"formulae", out}};
    });
  });

  // ------------------------------------------------------------ archives

  s.Get(api + "/archives", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      json out = json::array();
      for (const auto& [path, keys] : session.archives()) {
        out.push_back({{"path", path}, {"keys", keys_json({keys.begin(), keys.end()})}});
      }
      return json{{"archives", out}};
    });
  });

  s.Post(api + "/archives/save", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      const std::string path = required(b, "path");
      std::lock_guard lk(m);
      std::set<FormulaKey> keys;
      if (b.contains("keys")) {
        for (const auto& k : b["keys"]) keys.insert(key_from(k.get<std::string>()));
      } else {
        keys = session.selection(SelectionContext::Prove);
      }
      session.save_archive(keys, path);
      return json{{"path", normalize_path(path)}, {"count", keys.size()}};
    });
  });

  s.Post(api + "/archives/load", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string path = required(body_of(req), "path");
      std::lock_guard lk(m);
      json out = json::array();
      for (const auto& e : session.load_archive(path)) out.push_back(entry_to_json(e));
      return json{{"path", normalize_path(path)}, {"formulae", out}};
    });
  });

  // ------------------------------------------------------------ selections (prove and compute)

  const std::string ctx = "/(prove|compute)";

  s.Get(api + ctx + "/knowledge", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      std::lock_guard lk(m);
      return json{{"keys", keys_json(session.selection(c))}};
    });
  });

  s.Put(api + ctx + "/knowledge", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      const json b = body_of(req);
      std::set<FormulaKey> keys;
      for (const auto& k : b.at("keys")) keys.insert(key_from(k.get<std::string>()));
      std::lock_guard lk(m);
      session.replace_selection(c, keys);
      return json{{"keys", keys_json(session.selection(c))}};
    });
  });

  s.Get(api + ctx + "/knowledge/unit", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      const auto unit = unit_from(param(req, "kind"), param(req, "path"), req.get_param_value("id"));
      std::lock_guard lk(m);
      return json{{"state", to_string(session.unit_state(c, unit))}};
    });
  });

  s.Post(api + ctx + "/knowledge/unit", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      const json b = body_of(req);
      std::string id;
      if (b.contains("id")) id = b["id"].is_string() ? b["id"].get<std::string>() : std::to_string(b["id"].get<std::int64_t>());
      const auto unit = unit_from(required(b, "kind"), required(b, "path"), id);
      const bool selected = b.value("selected", true);
      std::lock_guard lk(m);
      const auto& keys = session.set_selection(c, unit, selected);
      return json{{"keys", keys_json(keys)}, {"state", to_string(session.unit_state(c, unit))}};
    });
  });

  s.Get(api + ctx + "/builtins", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      std::lock_guard lk(m);
      return json{{"ids", session.builtin_selection(c)}};
    });
  });

  s.Put(api + ctx + "/builtins", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const auto c = context_from(req.matches[1]);
      const json b = body_of(req);
      validate_builtins(b.at("ids"));
      std::lock_guard lk(m);
      session.set_builtin_selection(c, b["ids"].get<std::set<std::string>>());
      return json{{"ids", session.builtin_selection(c)}};
    });
  });

  // ------------------------------------------------------------ prove workflow

  s.Get(api + "/prove/goal", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      return goal_json();
    });
  });

  s.Put(api + "/prove/candidate", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      std::optional<FormulaKey> k;
      if (b.contains("key") && !b["key"].is_null()) k = key_from(b["key"].get<std::string>());
      std::lock_guard lk(m);
      candidate = k;
      return goal_json();
    });
  });

  s.Post(api + "/prove/confirm", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      if (!candidate) throw HttpError(409, "no_candidate", "error.no_confirmed_goal");
      if (!session.entry(*candidate)) throw UnknownUnit("no formula with key " + to_string(*candidate));
      confirmed = candidate;
      return goal_json();
    });
  });

  s.Get(api + "/prove/rules", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      return json{{"rules", rules_json()}};
    });
  });

  s.Put(api + "/prove/rules", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      std::lock_guard lk(m);
      RuleStates next = rule_states;
      for (const auto& r : b.at("rules")) {
        const std::string id = r.at("rule_id").get<std::string>();
        if (!find_rule(id)) throw HttpError(422, "invalid_settings", "error.invalid_settings", {{"detail", id}});
        RuleState& st = next[id];
        st.active = r.value("active", st.active);
        st.priority = r.value("priority", st.priority);
        st.explain = r.value("explain", st.explain);
      }
      ProverConfig trial = config();
      trial.rule_states = next;
      validate_config(trial);
      rule_states = next;
      return json{{"rules", rules_json()}};
    });
  });

  s.Get(api + "/prove/strategy", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      return json{{"strategy", strategy}, {"available", strategy_ids()}};
    });
  });

  s.Put(api + "/prove/strategy", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string id = required(body_of(req), "strategy");
      std::lock_guard lk(m);
      ProverConfig trial = config();
      trial.strategy = id;
      validate_config(trial);
      strategy = id;
      return json{{"strategy", strategy}, {"available", strategy_ids()}};
    });
  });

  s.Get(api + "/prove/limits", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      return to_json(limits);
    });
  });

  s.Put(api + "/prove/limits", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      std::lock_guard lk(m);
      Limits l = limits;
      l.max_depth = b.value("max_depth", l.max_depth);
      l.max_nodes = b.value("max_nodes", l.max_nodes);
      l.timeout_seconds = b.value("timeout_seconds", l.timeout_seconds);
      ProverConfig trial = config();
      trial.limits = l;
      validate_config(trial);
      limits = l;
      return to_json(limits);
    });
  });

  s.Get(api + "/prove/settings", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      return to_json(config());
    });
  });

  s.Post(api + "/prove/submit", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::lock_guard lk(m);
      if (!confirmed) throw HttpError(409, "no_confirmed_goal", "error.no_confirmed_goal");
      const ProverConfig c = config();
      validate_config(c);
      auto j = std::make_shared<Job>();
      j->id = "proof-" + std::to_string(next_proof++);
      j->snapshot = snapshot(c, session);
      proofs[j->id] = j;
      started.push_back(j);
      j->worker = std::thread([this, j] { run(j); });
      res.status = 202;
      return json{{"proof_id", j->id}};
    });
  });

  // ------------------------------------------------------------ proofs

  s.Get(api + "/proofs", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      std::vector<std::shared_ptr<Job>> jobs;
      {
        std::lock_guard lk(m);
        for (const auto& [id, j] : proofs) jobs.push_back(j);
      }
      json out = json::array();
      for (const auto& j : jobs) out.push_back(proof_summary(*j));
      return json{{"proofs", out}};
    });
  });

  s.Get(api + R"(/proofs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return proof_summary(*job(req.matches[1])); });
  });

  s.Delete(api + R"(/proofs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      auto j = job(req.matches[1]);
      j->cancel = true;
      std::lock_guard lk(m);
      proofs.erase(j->id);
      return json{{"proof_id", j->id}, {"discarded", true}};
    });
  });

  s.Post(api + R"(/proofs/([^/]+)/cancel)", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      auto j = job(req.matches[1]);
      j->cancel = true;
      return json{{"proof_id", j->id}};
    });
  });

  s.Get(api + R"(/proofs/([^/]+)/tree)", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return tree_of(*job(req.matches[1])); });
  });

  s.Get(api + R"(/proofs/([^/]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] { return to_json(job(req.matches[1])->snapshot); });
  });

  s.Get(api + R"(/proofs/([^/]+)/text)", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      auto j = job(req.matches[1]);
      std::string lang = req.has_param("lang") ? req.get_param_value("lang") : current_language();
      if (!i18n.has_language(lang)) throw HttpError(422, "unknown_language", "error.unknown_language", {{"detail", lang}});
      ProofTree t;
      bool done;
      {
        std::lock_guard lk(j->m);
        t = j->tree ? *j->tree : replay(j->events);
        done = j->done;
      }
      const ProofDocument doc = render_proof(t, i18n, lang);
      json out = to_json(doc);
      out["done"] = done;
      const std::string fmt = req.has_param("format") ? req.get_param_value("format") : "json";
      if (fmt == "text") out["text"] = to_text(doc);
      else if (fmt == "html") out["html"] = to_html(doc);
      else if (fmt != "json") throw std::invalid_argument("unknown format " + fmt);
      return out;
    });
  });

  s.Post(api + R"(/proofs/([^/]+)/restore-settings)", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      auto j = job(req.matches[1]);
      const ProverConfig c = restore_settings(j->snapshot);
      std::lock_guard lk(m);
      std::set<FormulaKey> present;
      json missing = json::array();
      for (const auto& k : c.knowledge) {
        if (session.entry(k)) present.insert(k);
        else missing.push_back(to_string(k));
      }
      session.replace_selection(SelectionContext::Prove, present);
      session.set_builtin_selection(SelectionContext::Prove, c.builtins);
      rule_states = c.rule_states;
      strategy = c.strategy;
      limits = c.limits;
      candidate = c.goal;
      confirmed = c.goal;
      return json{{"settings", to_json(config())}, {"missing", missing}};
    });
  });

  s.Get(api + R"(/proofs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Job> j;
    std::int64_t from = 0;
    try {
      j = job(req.matches[1]);
      if (req.has_param("from")) from = std::stoll(req.get_param_value("from"));
      if (req.has_header("Last-Event-ID")) from = std::max<std::int64_t>(from, std::stoll(req.get_header_value("Last-Event-ID")) + 1);
    } catch (...) {
      auto error = std::current_exception();
      respond(res, [&]() -> json { std::rethrow_exception(error); });
      return;
    }
    auto next = std::make_shared<std::int64_t>(std::max<std::int64_t>(from, 0));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, j, next](std::size_t, httplib::DataSink& sink) {
      std::unique_lock lk(j->m);
      j->cv.wait_for(lk, std::chrono::milliseconds(200),
                     [&] { return j->done || static_cast<std::int64_t>(j->events.size()) > *next; });
      std::string out;
      while (*next < static_cast<std::int64_t>(j->events.size())) out += sse_frame(j->events[(*next)++]);
      const bool finished = j->done && *next >= static_cast<std::int64_t>(j->events.size());
      lk.unlock();
      if (!out.empty() && !sink.write(out.data(), out.size())) return false;
      if (finished) {
        sink.done();
        return true;
      }
      return !stopping.load();
    });
  });

  // ------------------------------------------------------------ compute

  s.Post(api + "/compute", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const json b = body_of(req);
      const Formula expr = freeze_free_variables(parse_formula(required(b, "expr")));
      const int max_steps = b.value("max_steps", 1000);
      std::vector<FormulaEntry> kb;
      std::set<std::string> builtins;
      {
        std::lock_guard lk(m);
        if (b.value("use_compute_selections", true)) {
          kb = session.entries(session.selection(SelectionContext::Compute));
          builtins = session.builtin_selection(SelectionContext::Compute);
        } else {
          std::set<FormulaKey> keys;
          for (const auto& k : b.value("knowledge", json::array())) keys.insert(key_from(k.get<std::string>()));
          for (const auto& k : keys) {
            if (!session.entry(k)) throw UnknownUnit("no formula with key " + to_string(k));
          }
          kb = session.entries(keys);
          validate_builtins(b.value("builtins", json::array()));
          builtins = b.value("builtins", json::array()).get<std::set<std::string>>();
        }
      }
      return compute_to_json(compute(expr, kb, builtins, max_steps));
    });
  });

  // ------------------------------------------------------------ preferences and catalogs

  s.Get(api + "/preferences/languages", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      json out = json::array();
      for (const auto& tag : i18n.available_languages()) {
        out.push_back({{"tag", tag}, {"name", i18n.lookup("language.name", tag)}});
      }
      return json{{"languages", out}};
    });
  });

  s.Get(api + "/preferences/language", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] { return json{{"language", current_language()}}; });
  });

  s.Put(api + "/preferences/language", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string tag = required(body_of(req), "language");
      if (!i18n.has_language(tag)) throw HttpError(422, "unknown_language", "error.unknown_language", {{"detail", tag}});
      std::lock_guard lk(m);
      language = tag;
      return json{{"language", language}};
    });
  });

  s.Get(api + "/i18n", [this](const httplib::Request& req, httplib::Response& res) {
    respond(res, [&] {
      const std::string lang = req.has_param("lang") ? req.get_param_value("lang") : current_language();
      json strings = json::object();
      for (const auto& [key, value] : english_catalog().entries) strings[key] = i18n.lookup(key, lang);
      return json{{"language", lang}, {"strings", strings}};
    });
  });

  s.Get(api + "/rules", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      const std::string lang = current_language();
      json groups = json::array();
      for (const auto& g : rule_groups()) {
        json rules = json::array();
        for (const auto& id : g.rule_ids) {
          const InferenceRule* r = find_rule(id);
          rules.push_back({{"id", r->id},
                           {"group_path", r->group_path},
                           {"description", i18n.lookup(r->description_key, lang)},
                           {"default_priority", r->default_priority},
                           {"default_explain", r->default_explain}});
        }
        groups.push_back({{"id", g.id}, {"name", i18n.lookup("group." + g.id, lang)}, {"rules", rules}});
      }
      return json{{"groups", groups}};
    });
  });

  s.Get(api + "/builtins", [this](const httplib::Request&, httplib::Response& res) {
    respond(res, [&] {
      const std::string lang = current_language();
      std::map<std::string, std::string> descriptions;
      for (const auto& mbr : builtin_members()) descriptions[mbr.id] = i18n.lookup(mbr.description_key, lang);
      json groups = json::array();
      for (const auto& g : builtin_groups()) {
        json members = json::array();
        for (const auto& id : g.members) members.push_back({{"id", id}, {"description", descriptions[id]}});
        groups.push_back({{"id", g.id}, {"name", i18n.lookup("builtin_group." + g.id, lang)}, {"members", members}});
      }
      return json{{"groups", groups}};
    });
  });
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() {
  impl_->stopping = true;
  std::vector<std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lk(impl_->m);
    jobs = impl_->started;
  }
  for (auto& j : jobs) {
    j->cancel = true;
    if (j->worker.joinable()) j->worker.join();
  }
}

void Service::install(httplib::Server& server) { impl_->install(server); }

Session& Service::session() { return impl_->session; }

std::unique_lock<std::mutex> Service::lock() { return std::unique_lock(impl_->m); }

void Service::wait_idle() {
  std::vector<std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lk(impl_->m);
    jobs = impl_->started;
  }
  for (auto& j : jobs) {
    std::unique_lock lk(j->m);
    j->cv.wait(lk, [&] { return j->done; });
  }
}

std::pair<std::string, int> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : address.substr(0, colon);
  const std::string port = colon == std::string::npos ? address : address.substr(colon + 1);
  if (host.empty()) host = "127.0.0.1";
  if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos || port.size() > 5) {
    throw std::invalid_argument("bad address " + address);
  }
  const int p = std::stoi(port);
  if (p > 65535) throw std::invalid_argument("bad address " + address);
  return {host, p};
}

void serve(const std::string& address, ServiceOptions options, const std::function<void(int)>& on_ready) {
  const auto [host, port] = parse_address(address);
  httplib::Server server;
  Service service(std::move(options));
  service.install(server);
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + address);
  if (on_ready) on_ready(bound);
  server.listen_after_bind();
}

}  // namespace tma

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "cli_script.hpp"
#include "doctest.h"
#include "i18n_audit.hpp"
#include "tma/prover.hpp"
#include "tma/session.hpp"

using namespace tma;
using namespace tma::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string lang_dir() { return std::string(TMA_SOURCE_DIR) + "/lang"; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("tma_cli_" + std::to_string(::getpid()) + "_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("submit prints every elaborated formula") {
  auto r = run({"submit", data_path("vickrey.tnb")});
  REQUIRE(r.code == 0);
  Session s;
  const std::string path = normalize_path(data_path("vickrey.tnb"));
  s.open_document(path);
  const auto& cell = *find_cell(*s.document(path), CellId{15});
  const Formula expanded = apply_declarations(parse_formula(cell.text), s.declarations_at(path, CellId{15}));
  bool lemma = false;
  for (const auto& l : lines(r.out)) {
    if (l.rfind(path + "#15\t", 0) == 0) {
      lemma = true;
      CHECK(l.substr(l.rfind('\t') + 1) == format(expanded, Style::Unicode));
    }
  }
  CHECK(lemma);
  CHECK(lines(r.out).size() == 8);

  auto empty = run({"submit", data_path("empty.tnb")});
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());
  auto empty_json = run({"submit", data_path("empty.tnb"), "--format", "json"});
  CHECK(json::parse(empty_json.out)["formulae"].empty());

  auto broken = run({"submit", data_path("workbench.tnb")});
  CHECK(broken.code == kExitError);
  CHECK(broken.err.find("cell 4 at offset 2 to 2") != std::string::npos);
  CHECK(run({"submit", data_path("nowhere.tnb")}).code == kExitError);
}

TEST_CASE("prove exit codes") {
  CHECK(run({"prove", data_path("logic.tnb"), "6"}).code == kExitProved);
  CHECK(run({"prove", data_path("logic.tnb"), normalize_path(data_path("logic.tnb")) + "#6"}).code == kExitProved);
  CHECK(run({"prove", data_path("workbench.tnb"), "3", "--kb", "2"}).code == kExitProved);
  CHECK(run({"prove", data_path("workbench.tnb"), "3", "--kb", "2", "--disable-rule", "impl-goal-contrapose"}).code ==
        kExitFailed);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--kb", "none"}).code == kExitFailed);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--disable-rule", "no-such-rule"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--priority", "modus-ponens"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--priority", "modus-ponens=0"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--strategy", "guess"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--max-nodes", "0"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "99"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "1"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb")}).code == kExitError);
  CHECK(run({"frobnicate"}).code == kExitError);
  CHECK(run({"prove", data_path("logic.tnb"), "6", "--lang", "tlh"}).code == kExitError);
}

TEST_CASE("prove text and json output") {
  auto text = run({"prove", data_path("logic.tnb"), "6"});
  REQUIRE(text.code == 0);
  CHECK(text.out.rfind("Proof\n", 0) == 0);
  CHECK(text.out.find("This completes the proof.") != std::string::npos);
  CHECK(text.out.find("#5 rule application: proved [goal-in-kb]") != std::string::npos);
  CHECK(lines(text.out).back() == "Result: proved (the goal was proved)");

  auto quiet = run({"prove", data_path("logic.tnb"), "6", "--no-explain", "forall-kb-instantiate"});
  CHECK(quiet.out.find("Instantiating") == std::string::npos);

  auto j = run({"prove", data_path("logic.tnb"), "6", "--format", "json"});
  REQUIRE(j.code == 0);
  const json doc = json::parse(j.out);
  CHECK(doc["status"] == "proved");
  const SettingsSnapshot snap = snapshot_from_json(doc["snapshot"]);
  CHECK(doc["tree"] == tree_to_json(prove(snap)));
  CHECK(doc["text"]["blocks"].size() == doc["text"]["navigation"]["block_to_node"].size());

  auto progress = run({"prove", data_path("logic.tnb"), "6", "--progress"});
  std::vector<ProofEvent> events;
  for (const auto& l : lines(progress.err)) events.push_back(event_from_json(json::parse(l)));
  REQUIRE(!events.empty());
  CHECK(events.back().kind == "finished");
  CHECK(tree_to_json(replay(events)) == doc["tree"]);

  auto html = run({"prove", data_path("logic.tnb"), "6", "--format", "html"});
  CHECK(html.out.find("<p class=\"block\"") != std::string::npos);
}

TEST_CASE("prove writes the result back on request") {
  TempDir dir("writeback");
  const auto copy = dir.path / "logic.tnb";
  fs::copy_file(data_path("logic.tnb"), copy);
  REQUIRE(run({"prove", copy.string(), "6", "--write-back"}).code == 0);
  const Document d = load_document(copy.string());
  auto [group, index] = locate(const_cast<Document&>(d), CellId{6});
  REQUIRE(index + 1 < group->children.size());
  const Cell* cell = find_cell(d, element_id(group->children[index + 1]));
  REQUIRE(cell != nullptr);
  CHECK(cell->kind == CellKind::ProofResult);
  CHECK(cell->record["success"] == true);
}

TEST_CASE("compute") {
  auto r = run({"compute", "1+1", "--builtins", "arithmetic"});
  CHECK(r.code == 0);
  CHECK(r.out == "2\n");
  CHECK(run({"compute", "1+1"}).out == "1 + 1\n");
  auto f = run({"compute", "f[2]", "--kb", normalize_path(data_path("workbench.tnb")) + "#1", "--builtins", "arithmetic"});
  CHECK(f.out == "3\n");
  auto j = run({"compute", "f[2]", "--kb", normalize_path(data_path("workbench.tnb")) + "#1", "--format", "json"});
  CHECK(json::parse(j.out)["result"] == "2 + 1");
  CHECK(run({"compute", "f[2"}).code == kExitError);
  CHECK(run({"compute", "1", "--builtins", "alchemy"}).code == kExitError);
}

TEST_CASE("archive round trip") {
  TempDir dir("archive");
  const std::string archive = (dir.path / "logic.tarch").string();
  auto saved = run({"archive", "save", archive, data_path("logic.tnb")});
  REQUIRE(saved.code == 0);
  CHECK(saved.err.find("(3 formulas)") != std::string::npos);
  auto loaded = run({"archive", "load", archive});
  REQUIRE(loaded.code == 0);
  CHECK(loaded.out == run({"submit", data_path("logic.tnb")}).out);
  auto some = run({"archive", "save", archive, data_path("logic.tnb"), "--keys", "3", "4"});
  CHECK(some.code == 0);
  CHECK(lines(run({"archive", "load", archive}).out).size() == 2);
  CHECK(run({"archive", "load", (dir.path / "missing.tarch").string()}).code == kExitError);
  CHECK(run({"archive", "save", archive, data_path("empty.tnb")}).code == kExitError);
}

TEST_CASE("language list and preference") {
  TempDir config("config");
  ::setenv("TMA_CONFIG_DIR", config.path.c_str(), 1);
  ::unsetenv("TMA_LANG");
  CHECK(run({"lang", "list", "--lang-dir", lang_dir()}).out == "en\tEnglish\nde\tDeutsch\n");
  TempDir bare("bare");
  CHECK(run({"lang", "list", "--lang-dir", bare.path.string()}).out == "en\tEnglish\n");

  CHECK(run({"lang", "set", "xx", "--lang-dir", lang_dir()}).code == kExitError);
  auto set = run({"lang", "set", "de", "--lang-dir", lang_dir()});
  CHECK(set.code == 0);
  CHECK(set.err == "Die Sprache ist jetzt Deutsch.\n");
  auto german = run({"prove", data_path("logic.tnb"), "6", "--lang-dir", lang_dir()});
  CHECK(lines(german.out).back() == "Ergebnis: bewiesen (das Ziel wurde bewiesen)");
  ::setenv("TMA_LANG", "en", 1);
  CHECK(lines(run({"prove", data_path("logic.tnb"), "6", "--lang-dir", lang_dir()}).out).back() ==
        "Result: proved (the goal was proved)");
  ::unsetenv("TMA_LANG");
  ::unsetenv("TMA_CONFIG_DIR");
}

TEST_CASE("help is localized") {
  auto en = run({"--help", "--lang", "en", "--lang-dir", lang_dir()});
  CHECK(en.code == 0);
  CHECK(en.out.find("Prove a goal formula of a document") != std::string::npos);
  auto de = run({"prove", "--help", "--lang", "de", "--lang-dir", lang_dir()});
  CHECK(de.code == 0);
  CHECK(de.out.find("Eine Zielformel eines Dokuments beweisen") != std::string::npos);
  I18n shipped(lang_dir());
  CHECK(leaked_fragments(de.out, english_fragments(shipped)).empty());
}

TEST_CASE("scripted German run uses no English catalog text") {
  I18n shipped(lang_dir());
  const std::string de = script_output("de", lang_dir());
  CHECK(de.find("Damit ist der Beweis vollständig.") != std::string::npos);
  CHECK(de.find("Der Beweis ist gescheitert.") != std::string::npos);
  CHECK(de.find("Fehler: ") != std::string::npos);
  std::string leaked;
  for (const auto& f : leaked_fragments(de, english_fragments(shipped))) leaked += "[" + f + "]";
  CHECK(leaked == "");
}

TEST_CASE("an empty German catalog reproduces the English run") {
  TempDir dir("empty_de");
  std::ofstream(dir.path / "de") << "# nothing translated yet\n";
  const std::string en = script_output("en", lang_dir());
  const std::string fallback = script_output("de", dir.path.string());
  const auto a = lines(fallback), b = lines(en);
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    CAPTURE(i);
    CHECK(a[i] == b[i]);
  }
  CHECK(a.size() == b.size());
}

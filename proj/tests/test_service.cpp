#include <filesystem>
#include <thread>

#include <unistd.h>

#include "doctest.h"
#include "httplib.h"
#include "test_support.hpp"
#include "tma/document.hpp"
#include "tma/prover.hpp"
#include "tma/service.hpp"

using namespace tma;
using namespace tma::testing;
using json = nlohmann::json;

namespace {

struct Reply {
  int status = 0;
  json body;
};

struct TestServer {
  Service service;
  httplib::Server http;
  std::thread thread;
  int port = 0;

  TestServer() : service(ServiceOptions{std::string(TMA_SOURCE_DIR) + "/lang", "en"}) {
    service.install(http);
    port = http.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~TestServer() {
    service.wait_idle();
    http.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30);
    return c;
  }

  Reply send(const std::string& method, const std::string& path, const json& body = nullptr) const {
    auto c = client();
    httplib::Result r;
    const std::string text = body.is_null() ? "" : body.dump();
    if (method == "GET") r = c.Get("/api/v1" + path);
    else if (method == "POST") r = c.Post("/api/v1" + path, text, "application/json");
    else if (method == "PUT") r = c.Put("/api/v1" + path, text, "application/json");
    else if (method == "DELETE") r = c.Delete("/api/v1" + path);
    REQUIRE(r);
    Reply out{r->status, json()};
    if (r->get_header_value("Content-Type") == "application/json") out.body = json::parse(r->body);
    return out;
  }
  Reply get(const std::string& path) const { return send("GET", path); }
  Reply post(const std::string& path, const json& body = json::object()) const { return send("POST", path, body); }
  Reply put(const std::string& path, const json& body) const { return send("PUT", path, body); }

  std::string raw_get(const std::string& path, const httplib::Headers& headers = {}) const {
    auto c = client();
    std::string raw;
    auto r = c.Get("/api/v1" + path, headers, [&](const char* data, std::size_t n) {
      raw.append(data, n);
      return true;
    });
    REQUIRE(r);
    CHECK(r->status == 200);
    return raw;
  }
};

struct Frame {
  std::string id, event, data;
};

std::vector<Frame> parse_sse(const std::string& raw) {
  std::vector<Frame> out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto end = raw.find("\n\n", pos);
    if (end == std::string::npos) break;
    Frame f;
    std::string block = raw.substr(pos, end - pos);
    std::size_t line_start = 0;
    while (line_start <= block.size()) {
      auto nl = block.find('\n', line_start);
      std::string line = block.substr(line_start, nl == std::string::npos ? std::string::npos : nl - line_start);
      auto colon = line.find(": ");
      if (colon != std::string::npos) {
        const std::string field = line.substr(0, colon), value = line.substr(colon + 2);
        if (field == "id") f.id = value;
        else if (field == "event") f.event = value;
        else if (field == "data") f.data = value;
      }
      if (nl == std::string::npos) break;
      line_start = nl + 1;
    }
    out.push_back(f);
    pos = end + 2;
  }
  return out;
}

std::vector<ProofEvent> events_of(const std::vector<Frame>& frames) {
  std::vector<ProofEvent> out;
  for (const auto& f : frames) out.push_back(event_from_json(json::parse(f.data)));
  return out;
}

std::string doc(const std::string& name) { return normalize_path(data_path(name)); }
std::string key(const std::string& name, int cell) { return doc(name) + "#" + std::to_string(cell); }

std::string wait_done(const TestServer& s, const std::string& id) {
  for (int i = 0; i < 600; ++i) {
    auto r = s.get("/proofs/" + id);
    if (r.body["done"].get<bool>()) return r.body["status"].get<std::string>();
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  FAIL("proof did not finish");
  return "";
}

std::string prove_logic(const TestServer& s) {
  REQUIRE(s.post("/documents/open", {{"path", doc("logic.tnb")}}).status == 200);
  REQUIRE(s.post("/submit-document", {{"path", doc("logic.tnb")}}).status == 200);
  REQUIRE(s.put("/prove/candidate", {{"key", key("logic.tnb", 6)}}).status == 200);
  REQUIRE(s.post("/prove/confirm").status == 200);
  REQUIRE(s.put("/prove/knowledge", {{"keys", {key("logic.tnb", 3), key("logic.tnb", 4)}}}).status == 200);
  auto r = s.post("/prove/submit");
  REQUIRE(r.status == 202);
  return r.body["proof_id"].get<std::string>();
}

}  // namespace

TEST_CASE("documents, submission and declarations") {
  TestServer s;
  auto open = s.post("/documents/open", {{"path", doc("vickrey.tnb")}});
  REQUIRE(open.status == 200);
  CHECK(open.body["path"] == doc("vickrey.tnb"));
  CHECK(s.get("/documents").body["documents"].size() == 1);

  auto bids = s.post("/submit", {{"path", doc("vickrey.tnb")}, {"cell", 5}});
  REQUIRE(bids.status == 200);
  CHECK(bids.body["entry"]["formula"] == "∀ b : bids[b] :⟺ ∀ j = 1,…,|b| : b_j ≥ 0");
  CHECK(bids.body["entry"]["key"] == key("vickrey.tnb", 5));
  CHECK(bids.body["entry"]["label"] == "bids");
  CHECK(bids.body["warnings"].empty());

  auto decls = s.get("/declarations?path=" + doc("vickrey.tnb") + "&cell=15");
  REQUIRE(decls.status == 200);
  REQUIRE(decls.body["declarations"].size() == 2);
  CHECK(decls.body["declarations"][0]["origin"]["cell"] == 9);
  CHECK(decls.body["declarations"][1]["origin"]["cell"] == 13);

  CHECK(s.post("/submit", {{"path", doc("vickrey.tnb")}, {"cell", 99}}).status == 404);
  CHECK(s.get("/declarations?path=" + doc("vickrey.tnb") + "&cell=99").status == 404);
  CHECK(s.post("/submit", {{"path", doc("nowhere.tnb")}, {"cell", 1}}).status == 404);
  CHECK(s.get("/document?path=" + doc("nowhere.tnb")).status == 404);
  CHECK(s.post("/documents/open", {{"path", doc("nowhere.tnb")}}).status == 404);
  CHECK(s.post("/submit", {{"path", doc("vickrey.tnb")}, {"cell", 2}}).status == 422);

  REQUIRE(s.post("/documents/open", {{"path", doc("workbench.tnb")}}).status == 200);
  auto broken = s.post("/submit", {{"path", doc("workbench.tnb")}, {"cell", 4}});
  CHECK(broken.status == 422);
  CHECK(broken.body["error"]["code"] == "parse_error");
  CHECK(broken.body["error"]["span"]["begin"] == 2);
  CHECK(broken.body["error"]["cell"] == 4);

  CHECK(s.post("/submit", "not json").status == 400);
  CHECK(s.get("/formulae").body["formulae"].size() == 1);
}

TEST_CASE("prove workflow guards") {
  TestServer s;
  CHECK(s.post("/prove/submit").status == 409);
  CHECK(s.post("/prove/confirm").status == 409);
  REQUIRE(s.post("/documents/open", {{"path", doc("logic.tnb")}}).status == 200);
  REQUIRE(s.post("/submit-document", {{"path", doc("logic.tnb")}}).status == 200);

  REQUIRE(s.put("/prove/candidate", {{"key", key("logic.tnb", 6)}}).status == 200);
  CHECK(s.get("/prove/goal").body["confirmed"].is_null());
  CHECK(s.post("/prove/submit").status == 409);
  REQUIRE(s.post("/prove/confirm").status == 200);
  for (int cell : {3, 4, 6, 3}) {
    auto g = s.put("/prove/candidate", {{"key", key("logic.tnb", cell)}});
    CHECK(g.body["candidate"] == key("logic.tnb", cell));
    CHECK(g.body["confirmed"] == key("logic.tnb", 6));
  }
  CHECK(s.put("/prove/candidate", {{"key", nullptr}}).body["confirmed"] == key("logic.tnb", 6));

  const json rules = s.get("/prove/rules").body;
  CHECK(s.put("/prove/rules", {{"rules", {{{"rule_id", "modus-ponens"}, {"priority", 0}}}}}).status == 422);
  CHECK(s.put("/prove/rules", {{"rules", {{{"rule_id", "modus-ponens"}, {"priority", 101}}}}}).status == 422);
  CHECK(s.put("/prove/rules", {{"rules", {{{"rule_id", "no-such-rule"}, {"active", false}}}}}).status == 422);
  CHECK(s.get("/prove/rules").body == rules);
  auto ok = s.put("/prove/rules", {{"rules", {{{"rule_id", "modus-ponens"}, {"priority", 1}, {"explain", false}}}}});
  REQUIRE(ok.status == 200);
  CHECK(ok.body != rules);

  CHECK(s.put("/prove/strategy", {{"strategy", "breadth-first"}}).status == 422);
  CHECK(s.put("/prove/strategy", {{"strategy", "branch-alternatives"}}).body["strategy"] == "branch-alternatives");
  CHECK(s.put("/prove/limits", {{"max_nodes", 0}}).status == 422);
  CHECK(s.put("/prove/limits", {{"max_nodes", 50}}).body["max_nodes"] == 50);
  CHECK(s.put("/prove/builtins", {{"ids", {"arithmetic", "astrology"}}}).status == 422);
  CHECK(s.put("/prove/knowledge", {{"keys", {key("logic.tnb", 42)}}}).status == 404);
  CHECK(s.get("/proofs/proof-9/tree").status == 404);
  CHECK(s.get("/proofs/proof-9/events").status == 404);
  CHECK(s.post("/proofs/proof-9/restore-settings").status == 404);
}

TEST_CASE("event stream replays to the tree and resumes") {
  TestServer s;
  const std::string id = prove_logic(s);
  auto frames = parse_sse(s.raw_get("/proofs/" + id + "/events"));
  REQUIRE(wait_done(s, id) == "proved");
  REQUIRE(!frames.empty());
  CHECK(frames.back().event == "finished");
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(frames[i].id == std::to_string(i));
  const auto events = events_of(frames);
  const json tree = s.get("/proofs/" + id + "/tree").body;
  CHECK(canonical_string(replay(events)) == tree.dump());

  const auto n = frames.size();
  CHECK(s.raw_get("/proofs/" + id + "/events?from=" + std::to_string(n)).empty());
  CHECK(s.raw_get("/proofs/" + id + "/events?from=" + std::to_string(n + 10)).empty());
  for (std::size_t k : {std::size_t{0}, std::size_t{1}, n / 2, n - 1}) {
    auto tail = parse_sse(s.raw_get("/proofs/" + id + "/events?from=" + std::to_string(k)));
    REQUIRE(tail.size() == n - k);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i].data == frames[k + i].data);
    if (k > 0) {
      auto resumed = parse_sse(s.raw_get("/proofs/" + id + "/events", {{"Last-Event-ID", std::to_string(k - 1)}}));
      REQUIRE(resumed.size() == n - k);
      CHECK(resumed.front().data == frames[k].data);
    }
  }

  auto listing = s.get("/proofs").body["proofs"];
  REQUIRE(listing.size() == 1);
  CHECK(listing[0]["proof_id"] == id);
  CHECK(listing[0]["reason"] == "proved");
}

TEST_CASE("proof text, write-back and restore") {
  TestServer s;
  const std::string id = prove_logic(s);
  REQUIRE(wait_done(s, id) == "proved");

  auto en = s.get("/proofs/" + id + "/text?format=text");
  REQUIRE(en.status == 200);
  CHECK(en.body["success"] == true);
  CHECK(en.body["text"].get<std::string>().find("This completes the proof.") != std::string::npos);
  CHECK(en.body["navigation"]["block_to_node"].size() == en.body["blocks"].size());
  auto de = s.get("/proofs/" + id + "/text?lang=de&format=html");
  CHECK(de.body["html"].get<std::string>().find("Damit ist der Beweis vollständig.") != std::string::npos);
  CHECK(s.get("/proofs/" + id + "/text?lang=tlh").status == 422);

  auto d = s.get("/document?path=" + doc("logic.tnb")).body["document"];
  bool found = false;
  for (const auto& c : d["cells"]) {
    if (c["id"] != 5) continue;
    REQUIRE(c["children"].size() == 2);
    CHECK(c["children"][0]["id"] == 6);
    CHECK(c["children"][1]["kind"] == "proof_result");
    CHECK(c["children"][1]["record"]["proof_id"] == id);
    CHECK(c["children"][1]["record"]["summary"].get<std::string>().rfind("Proof succeeded.", 0) == 0);
    found = true;
  }
  CHECK(found);

  const json snap = s.get("/proofs/" + id + "/snapshot").body;
  REQUIRE(s.put("/prove/strategy", {{"strategy", "branch-alternatives"}}).status == 200);
  REQUIRE(s.put("/prove/rules", {{"rules", {{{"rule_id", "goal-in-kb"}, {"active", false}}}}}).status == 200);
  REQUIRE(s.put("/prove/knowledge", {{"keys", json::array()}}).status == 200);
  REQUIRE(s.put("/prove/candidate", {{"key", key("logic.tnb", 3)}}).status == 200);
  REQUIRE(s.post("/prove/confirm").status == 200);
  auto restored = s.post("/proofs/" + id + "/restore-settings");
  REQUIRE(restored.status == 200);
  CHECK(restored.body["missing"].empty());
  std::map<std::string, json> current, stored;
  const json now = s.get("/prove/rules").body;
  for (const auto& r : now["rules"]) current[r["rule_id"]] = r;
  for (const auto& r : snap["config"]["rules"]) stored[r["rule_id"]] = r;
  CHECK(current == stored);
  CHECK(s.get("/prove/strategy").body["strategy"] == snap["config"]["strategy"]);
  CHECK(s.get("/prove/knowledge").body["keys"] == snap["config"]["knowledge"]);
  CHECK(s.get("/prove/goal").body["confirmed"] == snap["config"]["goal"]);
  CHECK(s.get("/prove/settings").body == snap["config"]);

  const std::string again = s.post("/prove/submit").body["proof_id"];
  REQUIRE(wait_done(s, again) == "proved");
  CHECK(s.get("/proofs/" + again + "/tree").body == s.get("/proofs/" + id + "/tree").body);

  CHECK(s.send("DELETE", "/proofs/" + id).status == 200);
  CHECK(s.get("/proofs/" + id + "/tree").status == 404);
  CHECK(s.get("/proofs").body["proofs"].size() == 1);
}

TEST_CASE("reads are stateless") {
  TestServer s;
  const std::string id = prove_logic(s);
  REQUIRE(wait_done(s, id) == "proved");
  const std::vector<std::string> reads = {"/documents", "/document?path=" + doc("logic.tnb"), "/formulae",
                                          "/prove/goal", "/prove/knowledge", "/prove/builtins", "/prove/rules",
                                          "/prove/strategy", "/prove/limits", "/prove/settings", "/proofs",
                                          "/proofs/" + id + "/tree", "/proofs/" + id + "/text",
                                          "/proofs/" + id + "/snapshot", "/preferences/languages",
                                          "/preferences/language", "/i18n", "/rules", "/builtins",
                                          "/compute/knowledge", "/archives"};
  for (const auto& path : reads) {
    CAPTURE(path);
    auto a = s.get(path);
    auto b = s.get(path);
    CHECK(a.status == 200);
    CHECK(a.body == b.body);
  }
}

TEST_CASE("compute endpoint") {
  TestServer s;
  REQUIRE(s.post("/documents/open", {{"path", doc("workbench.tnb")}}).status == 200);
  REQUIRE(s.post("/submit", {{"path", doc("workbench.tnb")}, {"cell", 1}}).status == 200);
  REQUIRE(s.put("/compute/knowledge", {{"keys", {key("workbench.tnb", 1)}}}).status == 200);
  REQUIRE(s.put("/compute/builtins", {{"ids", {"arithmetic"}}}).status == 200);

  auto r = s.post("/compute", {{"expr", "f[2]"}, {"use_compute_selections", true}});
  REQUIRE(r.status == 200);
  CHECK(r.body["result"] == "3");
  REQUIRE(r.body["trace"].size() == 2);
  CHECK(r.body["trace"][0]["rule"] == "succ");
  CHECK(r.body["trace"][0]["result"] == "2 + 1");

  CHECK(s.post("/compute", {{"expr", "f[2]"}, {"use_compute_selections", false}}).body["result"] == "f[2]");
  CHECK(s.post("/compute", {{"expr", "1 + 1"}, {"use_compute_selections", false}, {"builtins", {"arithmetic"}}})
            .body["result"] == "2");
  auto bad = s.post("/compute", {{"expr", "f[2"}});
  CHECK(bad.status == 422);
  CHECK(bad.body["error"]["code"] == "parse_error");
  CHECK(s.post("/compute", {{"expr", "1"}, {"use_compute_selections", false}, {"builtins", {"alchemy"}}}).status == 422);
  CHECK(s.post("/compute", {{"use_compute_selections", true}}).status == 400);
}

TEST_CASE("preferences and localized errors") {
  TestServer s;
  auto langs = s.get("/preferences/languages").body["languages"];
  REQUIRE(langs.size() == 2);
  CHECK(langs[0]["tag"] == "en");
  CHECK(langs[1]["tag"] == "de");
  CHECK(langs[1]["name"] == "Deutsch");

  CHECK(s.get("/preferences/language").body["language"] == "en");
  CHECK(s.get("/proofs/proof-1").body["error"]["message"].get<std::string>().rfind("Error: ", 0) == 0);
  CHECK(s.put("/preferences/language", {{"language", "de"}}).status == 200);
  CHECK(s.get("/preferences/language").body["language"] == "de");
  CHECK(s.put("/preferences/language", {{"language", "xx"}}).status == 422);
  CHECK(s.get("/preferences/language").body["language"] == "de");
  CHECK(s.get("/proofs/proof-1").body["error"]["message"].get<std::string>().rfind("Fehler: ", 0) == 0);

  auto strings = s.get("/i18n").body;
  CHECK(strings["language"] == "de");
  CHECK(strings["strings"]["status.proved"] == "bewiesen");
  CHECK(s.get("/i18n?lang=en").body["strings"]["status.proved"] == "proved");
  auto groups = s.get("/rules").body["groups"];
  REQUIRE(groups.size() == rule_groups().size());
  CHECK(groups[0]["name"] == "Abschluss");
  std::size_t rules = 0;
  for (const auto& g : groups) rules += g["rules"].size();
  CHECK(rules == rule_list().size());
  CHECK(s.get("/builtins").body["groups"][0]["name"] == "Arithmetik");
}

TEST_CASE("selection units and archives") {
  TestServer s;
  REQUIRE(s.post("/documents/open", {{"path", doc("logic.tnb")}}).status == 200);
  REQUIRE(s.post("/submit-document", {{"path", doc("logic.tnb")}}).status == 200);
  auto sel = s.post("/prove/knowledge/unit", {{"kind", "environment"}, {"path", doc("logic.tnb")}, {"id", 2}, {"selected", true}});
  REQUIRE(sel.status == 200);
  CHECK(sel.body["state"] == "checked");
  CHECK(sel.body["keys"].size() == 2);
  auto whole = s.get("/prove/knowledge/unit?kind=document&path=" + doc("logic.tnb"));
  CHECK(whole.body["state"] == "partial");
  CHECK(s.post("/prove/knowledge/unit", {{"kind", "section"}, {"path", doc("logic.tnb")}, {"id", 77}}).status == 404);

  const auto path = (std::filesystem::temp_directory_path() / ("tma_service_" + std::to_string(::getpid()) + ".tarch")).string();
  auto saved = s.post("/archives/save", {{"path", path}});
  REQUIRE(saved.status == 200);
  CHECK(saved.body["count"] == 2);
  auto loaded = s.post("/archives/load", {{"path", path}});
  REQUIRE(loaded.status == 200);
  CHECK(loaded.body["formulae"].size() == 2);
  CHECK(s.get("/archives").body["archives"].size() == 1);
  std::filesystem::remove(path);
  CHECK(s.post("/archives/load", {{"path", path}}).status == 404);
}

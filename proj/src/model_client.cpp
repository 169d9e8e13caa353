#include "essaymark/model_client.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "essaymark/utf8.hpp"

namespace essaymark {

namespace {

using nlohmann::json;

struct TransportResult {
  std::optional<json> body;
  std::optional<std::string> error;
};

TransportResult post_json(const ClientConfig& cfg, const std::string& path,
                          const json& body) {
  for (int attempt = 0; attempt <= cfg.policy.retries; ++attempt) {
    httplib::Client cli(cfg.endpoint);
    cli.set_connection_timeout(0, cfg.policy.timeout_ms * 1000);
    cli.set_read_timeout(0, cfg.policy.timeout_ms * 1000);
    cli.set_write_timeout(0, cfg.policy.timeout_ms * 1000);
    if (!cfg.bearer_token.empty())
      cli.set_default_headers(
          {{"Authorization", "Bearer " + cfg.bearer_token}});
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) {
      if (attempt == cfg.policy.retries) return {std::nullopt, "Timeout"};
      continue;
    }
    if (res->status != 200) {
      if (attempt == cfg.policy.retries)
        return {std::nullopt, "BadStatus(" + std::to_string(res->status) + ")"};
      continue;
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
      return {std::nullopt, "SchemaViolation: response is not JSON"};
    return {parsed, std::nullopt};
  }
  return {std::nullopt, "Timeout"};
}

}  // namespace

FixtureStore FixtureStore::open(const std::string& path) {
  FixtureStore store;
  std::ifstream in(path);
  if (!in) return store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("request_hash") ||
        !j.contains("response"))
      throw std::runtime_error("bad fixture line " + std::to_string(lineno) +
                               " in " + path);
    store.entries_[j["request_hash"].get<std::string>()] = j["response"];
  }
  return store;
}

std::string FixtureStore::request_hash(const json& request) {
  // FNV-1a 64 over the canonical dump (nlohmann objects are key-sorted)
  const std::string s = request.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::optional<json> FixtureStore::lookup(const std::string& hash) const {
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void FixtureStore::put(const std::string& hash, json response) {
  entries_[hash] = std::move(response);
}

void FixtureStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write fixture file: " + path);
  for (const auto& [hash, response] : entries_) {
    json line = {{"request_hash", hash}, {"response", response}};
    out << line.dump() << "\n";
  }
}

AnnotatorClient::AnnotatorClient(ClientConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.mode != ClientMode::Live && !cfg_.fixture_path.empty())
    fixtures_ = FixtureStore::open(cfg_.fixture_path);
}

AnnotateOutcome AnnotatorClient::annotate_one(const std::string& id,
                                              const std::string& text) {
  AnnotateOutcome out;
  const json request = {{"essay_id", id}, {"text", text}};
  const std::string hash = FixtureStore::request_hash(request);

  std::optional<json> response;
  {
    std::lock_guard<std::mutex> lock(mu_);
    response = fixtures_.lookup(hash);
  }
  if (!response) {
    if (cfg_.mode == ClientMode::Replay) {
      out.error = "FixtureMiss(" + hash + ")";
      return out;
    }
    auto tr = post_json(cfg_, "/v1/annotate", request);
    if (tr.error) {
      out.error = *tr.error;
      return out;
    }
    response = *tr.body;
    if (cfg_.mode == ClientMode::Record) {
      std::lock_guard<std::mutex> lock(mu_);
      fixtures_.put(hash, *response);
    }
  }

  if (!response->is_object() || !response->contains("spans") ||
      !(*response)["spans"].is_array()) {
    out.error = "SchemaViolation: missing spans array";
    return out;
  }
  const std::size_t len = utf8::length(text);
  for (const auto& s : (*response)["spans"]) {
    if (!s.is_object() || !s.contains("start") || !s.contains("end") ||
        !s.contains("label") || !s["start"].is_number() ||
        !s["end"].is_number() || !s["label"].is_string()) {
      out.error = "SchemaViolation: bad span record";
      return out;
    }
    auto label = component_label_from_string(s["label"].get<std::string>());
    if (!label) {
      out.error = "SchemaViolation: unknown label " +
                  s["label"].get<std::string>();
      return out;
    }
    if (s.contains("confidence")) {
      if (!s["confidence"].is_number() || s["confidence"].get<double>() < 0 ||
          s["confidence"].get<double>() > 1) {
        out.error = "SchemaViolation: confidence outside [0,1]";
        return out;
      }
    }
    long start = s["start"].get<long>();
    long end = s["end"].get<long>();
    if (start < 0 || end > static_cast<long>(len)) {
      out.warnings.push_back("span [" + std::to_string(start) + "," +
                             std::to_string(end) + ") clipped to text bounds");
      start = std::max(start, 0L);
      end = std::min(end, static_cast<long>(len));
    }
    if (end <= start) {
      out.warnings.push_back("empty span dropped");
      continue;
    }
    out.spans.push_back({id, static_cast<std::size_t>(start),
                         static_cast<std::size_t>(end), *label});
  }
  return out;
}

std::vector<AnnotateOutcome> AnnotatorClient::annotate(
    const std::vector<std::pair<std::string, std::string>>& essays) {
  std::vector<AnnotateOutcome> results(essays.size());
  const int workers =
      std::max(1, std::min<int>(cfg_.policy.concurrency,
                                static_cast<int>(essays.size())));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= essays.size()) break;
        results[i] = annotate_one(essays[i].first, essays[i].second);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

void AnnotatorClient::save_fixtures() const {
  if (cfg_.mode == ClientMode::Record && !cfg_.fixture_path.empty()) {
    std::lock_guard<std::mutex> lock(mu_);
    fixtures_.save(cfg_.fixture_path);
  }
}

CorrectorClient::CorrectorClient(ClientConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.mode != ClientMode::Live && !cfg_.fixture_path.empty())
    fixtures_ = FixtureStore::open(cfg_.fixture_path);
}

CorrectOutcome CorrectorClient::correct(
    const std::vector<std::string>& sentences) {
  CorrectOutcome out;
  const json request = {{"sentences", sentences}};
  const std::string hash = FixtureStore::request_hash(request);

  std::optional<json> response;
  {
    std::lock_guard<std::mutex> lock(mu_);
    response = fixtures_.lookup(hash);
  }
  if (!response) {
    if (cfg_.mode == ClientMode::Replay) {
      out.error = "FixtureMiss(" + hash + ")";
      return out;
    }
    auto tr = post_json(cfg_, "/v1/correct", request);
    if (tr.error) {
      out.error = *tr.error;
      return out;
    }
    response = *tr.body;
    if (cfg_.mode == ClientMode::Record) {
      std::lock_guard<std::mutex> lock(mu_);
      fixtures_.put(hash, *response);
    }
  }

  if (!response->is_object() || !response->contains("corrected") ||
      !(*response)["corrected"].is_array()) {
    out.error = "SchemaViolation: missing corrected array";
    return out;
  }
  const auto& corrected = (*response)["corrected"];
  if (corrected.size() != sentences.size()) {
    out.error = "SchemaViolation: corrected length " +
                std::to_string(corrected.size()) + " != " +
                std::to_string(sentences.size());
    return out;
  }
  for (const auto& c : corrected) {
    if (!c.is_string()) {
      out.error = "SchemaViolation: corrected entry is not a string";
      return {};
    }
    out.corrected.push_back(c.get<std::string>());
  }
  return out;
}

std::vector<std::string> CorrectorClient::correct_all(
    const std::vector<std::string>& sentences, std::size_t batch_size,
    std::vector<std::string>* errors) {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  if (batch_size == 0) batch_size = 1;
  for (std::size_t i = 0; i < sentences.size(); i += batch_size) {
    std::vector<std::string> batch(
        sentences.begin() + static_cast<long>(i),
        sentences.begin() +
            static_cast<long>(std::min(i + batch_size, sentences.size())));
    CorrectOutcome res = correct(batch);
    if (res.error) {
      if (errors) errors->push_back(*res.error);
      // identity fallback keeps downstream offsets consistent
      out.insert(out.end(), batch.begin(), batch.end());
    } else {
      out.insert(out.end(), res.corrected.begin(), res.corrected.end());
    }
  }
  return out;
}

void CorrectorClient::save_fixtures() const {
  if (cfg_.mode == ClientMode::Record && !cfg_.fixture_path.empty()) {
    std::lock_guard<std::mutex> lock(mu_);
    fixtures_.save(cfg_.fixture_path);
  }
}

}  // namespace essaymark

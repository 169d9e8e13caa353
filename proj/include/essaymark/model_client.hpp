#ifndef ESSAYMARK_MODEL_CLIENT_HPP
#define ESSAYMARK_MODEL_CLIENT_HPP

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "essaymark/types.hpp"

namespace essaymark {

struct RequestPolicy {
  int timeout_ms = 10000;
  int retries = 2;      // attempts = retries + 1
  int concurrency = 4;  // bounded in-flight requests
};

enum class ClientMode { Live, Record, Replay };

// JSONL store of {request_hash, response}. The hash is FNV-1a over the
// canonicalized (key-sorted) request body, so identical requests share an
// entry and retries never duplicate results.
class FixtureStore {
 public:
  FixtureStore() = default;
  static FixtureStore open(const std::string& path);  // missing file = empty

  static std::string request_hash(const nlohmann::json& request);

  std::optional<nlohmann::json> lookup(const std::string& hash) const;
  void put(const std::string& hash, nlohmann::json response);
  void save(const std::string& path) const;  // sorted by hash, deterministic
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, nlohmann::json> entries_;
};

struct ClientConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  ClientMode mode = ClientMode::Live;
  std::string fixture_path;  // read in Replay, written in Record
  std::string bearer_token;
  RequestPolicy policy;
};

struct AnnotateOutcome {
  std::vector<ComponentSpan> spans;
  std::optional<std::string> error;  // Timeout / BadStatus(n) / SchemaViolation
  std::vector<std::string> warnings;
};

// POST /v1/annotate with {"essay_id", "text"}; response
// {"spans": [{"start", "end", "label", "confidence"?}]}.
class AnnotatorClient {
 public:
  explicit AnnotatorClient(ClientConfig cfg);

  // One request per essay; per-essay failures are reported in the outcome
  // and do not abort the batch. Output order matches input order.
  std::vector<AnnotateOutcome> annotate(
      const std::vector<std::pair<std::string, std::string>>& essays);

  void save_fixtures() const;

 private:
  AnnotateOutcome annotate_one(const std::string& id, const std::string& text);

  ClientConfig cfg_;
  FixtureStore fixtures_;
  mutable std::mutex mu_;
};

struct CorrectOutcome {
  std::vector<std::string> corrected;
  std::optional<std::string> error;
};

// POST /v1/correct with {"sentences": [...]}; response {"corrected": [...]}
// of the same length.
class CorrectorClient {
 public:
  explicit CorrectorClient(ClientConfig cfg);

  CorrectOutcome correct(const std::vector<std::string>& sentences);

  // Splits into batches of batch_size, preserving order. Failed batches
  // fall back to identity and are reported through `errors`.
  std::vector<std::string> correct_all(const std::vector<std::string>& sentences,
                                       std::size_t batch_size,
                                       std::vector<std::string>* errors);

  void save_fixtures() const;

 private:
  ClientConfig cfg_;
  FixtureStore fixtures_;
  mutable std::mutex mu_;
};

}  // namespace essaymark

#endif

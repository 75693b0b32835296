#pragma once

/**
 * Remote generation client speaking the OpenAI-compatible completions
 * wire protocol over HTTP with server-sent-event streaming. Supports both
 * the raw-completions and chat request shapes.
 *
 * Transport failures are retried with exponential backoff (3 attempts by
 * default) as long as no content has been consumed; mid-stream failures
 * surface immediately to avoid duplicated text. Budget and stop sequences
 * are enforced client-side as well, so the generate() contract holds even
 * against a misbehaving server.
 */

#include <memory>
#include <string>

#include "leap/backend.hpp"

namespace leap {

struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "default";
  std::string api_key;  // sent as a Bearer token when non-empty

  enum class RequestShape { Completions, Chat };
  RequestShape shape = RequestShape::Completions;

  int max_in_flight = 8;
  int max_attempts = 3;
  int initial_backoff_ms = 100;

  /// Fallback token estimate when the server reports no usage.
  double chars_per_token = 4.0;

  int connect_timeout_s = 10;
  int read_timeout_s = 300;
};

class HttpBackend final : public TextBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  GenerationResult generate(std::string_view context, std::size_t budget_tokens,
                            const GenerationConfig& config,
                            const ChunkSink& sink = nullptr) override;

  std::size_t count_tokens(std::string_view text) const override;
  std::string token_prefix(std::string_view text, std::size_t max_tokens) const override;

  const HttpBackendConfig& settings() const { return config_; }

 private:
  struct InFlightGuard;

  HttpBackendConfig config_;
  struct Gate;
  std::unique_ptr<Gate> gate_;
};

}  // namespace leap

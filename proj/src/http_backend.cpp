#include "leap/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "leap/errors.hpp"

namespace leap {

using nlohmann::json;

// Bounds concurrent requests; the per-call contract is full isolation.
struct HttpBackend::Gate {
  std::mutex mu;
  std::condition_variable cv;
  int available;

  explicit Gate(int slots) : available(slots) {}

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
};

struct HttpBackend::InFlightGuard {
  Gate& gate;
  explicit InFlightGuard(Gate& g) : gate(g) { gate.acquire(); }
  ~InFlightGuard() { gate.release(); }
};

namespace {

struct StreamState {
  std::string text;
  std::string sse_buffer;
  std::string error_body;
  int http_status = 0;
  bool done = false;
  bool any_data = false;
  bool client_cutoff = false;  // we aborted deliberately (budget/stop)
  FinishReason finish = FinishReason::None;
  std::string matched_stop;
  std::string server_finish;
  std::optional<std::size_t> usage_completion_tokens;
};

// Extracts the text delta of one SSE payload for either request shape.
std::string delta_text(const json& payload, HttpBackendConfig::RequestShape shape) {
  if (!payload.contains("choices") || payload["choices"].empty()) return "";
  const auto& choice = payload["choices"][0];
  if (shape == HttpBackendConfig::RequestShape::Completions) {
    if (choice.contains("text") && choice["text"].is_string()) return choice["text"];
    return "";
  }
  if (choice.contains("delta") && choice["delta"].contains("content") &&
      choice["delta"]["content"].is_string()) {
    return choice["delta"]["content"];
  }
  return "";
}

bool looks_like_context_overflow(const std::string& body) {
  return body.find("context") != std::string::npos ||
         body.find("maximum length") != std::string::npos;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), gate_(std::make_unique<Gate>(std::max(1, config_.max_in_flight))) {}

HttpBackend::~HttpBackend() = default;

std::size_t HttpBackend::count_tokens(std::string_view text) const {
  if (text.empty()) return 0;
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(text.size()) / config_.chars_per_token));
}

std::string HttpBackend::token_prefix(std::string_view text, std::size_t max_tokens) const {
  const auto keep = static_cast<std::size_t>(
      std::llround(static_cast<double>(max_tokens) * config_.chars_per_token));
  return std::string(text.substr(0, std::min(text.size(), keep)));
}

GenerationResult HttpBackend::generate(std::string_view context, std::size_t budget_tokens,
                                       const GenerationConfig& config, const ChunkSink& sink) {
  if (budget_tokens < 1) throw std::invalid_argument("generate: budget must be >= 1");
  if (context.empty()) throw std::invalid_argument("generate: context must be non-empty");

  json request = {
      {"model", config_.model},
      {"max_tokens", budget_tokens},
      {"temperature", config.temperature},
      {"top_p", config.top_p},
      {"stream", true},
      {"stream_options", {{"include_usage", true}}},
  };
  if (config.top_k) request["top_k"] = *config.top_k;
  if (config.seed) request["seed"] = *config.seed;
  if (config.stream_id) request["user"] = "path-" + std::to_string(*config.stream_id);
  if (!config.stop_sequences.empty()) request["stop"] = config.stop_sequences;

  std::string endpoint;
  if (config_.shape == HttpBackendConfig::RequestShape::Completions) {
    request["prompt"] = std::string(context);
    endpoint = "/v1/completions";
  } else {
    request["messages"] = json::array({{{"role", "user"}, {"content", std::string(context)}}});
    endpoint = "/v1/chat/completions";
  }
  const std::string body = request.dump();

  httplib::Headers headers = {{"Accept", "text/event-stream"}};
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  InFlightGuard guard(*gate_);

  int attempt = 0;
  while (true) {
    ++attempt;
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.connect_timeout_s, 0);
    client.set_read_timeout(config_.read_timeout_s, 0);

    StreamState state;
    const auto consume_event = [&](const std::string& data) {
      if (data == "[DONE]") {
        state.done = true;
        return true;
      }
      json payload;
      try {
        payload = json::parse(data);
      } catch (const json::exception&) {
        return true;  // tolerate keep-alives and malformed heartbeats
      }
      if (payload.contains("usage") && payload["usage"].contains("completion_tokens")) {
        state.usage_completion_tokens = payload["usage"]["completion_tokens"].get<std::size_t>();
      }
      if (payload.contains("choices") && !payload["choices"].empty()) {
        const auto& choice = payload["choices"][0];
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
          state.server_finish = choice["finish_reason"];
        }
      }
      const std::string delta = delta_text(payload, config_.shape);
      if (delta.empty()) return true;
      state.any_data = true;
      state.text += delta;

      // Client-side stop enforcement.
      for (const auto& stop : config.stop_sequences) {
        if (stop.empty()) continue;
        const std::size_t scan_from =
            state.text.size() > delta.size() + stop.size()
                ? state.text.size() - delta.size() - stop.size()
                : 0;
        const std::size_t at = state.text.find(stop, scan_from);
        if (at != std::string::npos) {
          state.text.resize(at);
          state.finish = FinishReason::StopSequence;
          state.matched_stop = stop;
          state.client_cutoff = true;
          return false;  // abort the stream
        }
      }
      // Client-side budget enforcement.
      if (count_tokens(state.text) > budget_tokens) {
        state.text = token_prefix(state.text, budget_tokens);
        state.finish = FinishReason::Budget;
        state.client_cutoff = true;
        return false;
      }
      return true;
    };

    const auto receiver = [&](const char* data, std::size_t len) {
      if (state.http_status != 200) {
        state.error_body.append(data, len);
        return true;
      }
      state.sse_buffer.append(data, len);
      std::size_t pos;
      while ((pos = state.sse_buffer.find('\n')) != std::string::npos) {
        std::string line = state.sse_buffer.substr(0, pos);
        state.sse_buffer.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("data: ", 0) == 0) {
          if (!consume_event(line.substr(6))) return false;
        } else if (line.rfind("data:", 0) == 0) {
          if (!consume_event(line.substr(5))) return false;
        }
      }
      return true;
    };

    httplib::Request req;
    req.method = "POST";
    req.path = endpoint;
    req.headers = headers;
    req.body = body;
    req.set_header("Content-Type", "application/json");
    req.response_handler = [&](const httplib::Response& response) {
      state.http_status = response.status;
      return true;
    };
    req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t,
                               std::uint64_t) { return receiver(data, len); };
    const auto result = client.send(req);

    const bool transport_ok =
        (result && result.error() == httplib::Error::Success) ||
        (state.client_cutoff && result.error() == httplib::Error::Canceled);

    if (transport_ok && state.http_status == 200) {
      GenerationResult out;
      out.text = state.text;
      out.attempts = attempt;
      if (state.finish != FinishReason::None) {
        out.finish = state.finish;
        out.matched_stop = state.matched_stop;
      } else if (state.server_finish == "length") {
        out.finish = FinishReason::Budget;
      } else if (state.server_finish == "stop" && !config.stop_sequences.empty() &&
                 state.done) {
        // Server-side stop: the matched sequence never reaches the text.
        out.finish = FinishReason::EndOfSequence;
      } else {
        out.finish = FinishReason::EndOfSequence;
      }
      out.token_count = state.usage_completion_tokens
                            ? std::min(*state.usage_completion_tokens, budget_tokens)
                            : count_tokens(out.text);
      if (sink) {
        GenerationChunk chunk{out.text, out.token_count, out.finish, out.matched_stop};
        sink(chunk);
      }
      return out;
    }

    // Failure classification.
    if (transport_ok && state.http_status != 200) {
      const int status = state.http_status;
      const bool retriable_status = status == 408 || status == 429 || status >= 500;
      if (!retriable_status) {
        if (looks_like_context_overflow(state.error_body)) {
          throw BackendError("context overflow rejected by backend (HTTP " +
                                 std::to_string(status) + ")",
                             /*retriable=*/false, attempt);
        }
        throw BackendError("backend rejected request (HTTP " + std::to_string(status) +
                               "): " + state.error_body,
                           /*retriable=*/false, attempt);
      }
    }

    if (state.any_data) {
      // Partial content consumed: retrying would duplicate text.
      throw BackendError("stream interrupted mid-generation", /*retriable=*/true, attempt);
    }
    if (attempt >= config_.max_attempts) {
      throw BackendError("transport failure after " + std::to_string(attempt) + " attempts",
                         /*retriable=*/true, attempt);
    }
    const auto backoff =
        std::chrono::milliseconds(config_.initial_backoff_ms) * (1LL << (attempt - 1));
    std::this_thread::sleep_for(backoff);
  }
}

}  // namespace leap

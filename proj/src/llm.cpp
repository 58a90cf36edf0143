#include "scaffold/llm.hpp"

#include <cctype>
#include <limits>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace scaffold {

namespace {

using nlohmann::json;

std::string lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool glued(char c) {
  // Characters that disqualify an adjacent digit run from being a
  // standalone integer: parts of words, decimals, identifiers.
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
}

struct DigitRun {
  size_t begin = 0;
  size_t end = 0;
  long long value = 0;  // saturated at LLONG_MAX
};

std::optional<DigitRun> scan_run(const std::string& text, size_t from) {
  size_t i = from;
  while (i < text.size() && !std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == text.size()) return std::nullopt;
  DigitRun run;
  run.begin = i;
  unsigned long long acc = 0;
  bool saturated = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    unsigned long long d = static_cast<unsigned long long>(text[i] - '0');
    constexpr auto kMax =
        static_cast<unsigned long long>(std::numeric_limits<long long>::max());
    if (saturated || acc > (kMax - d) / 10) {
      saturated = true;
    } else {
      acc = acc * 10 + d;
    }
    ++i;
  }
  run.end = i;
  run.value = saturated ? std::numeric_limits<long long>::max()
                        : static_cast<long long>(acc);
  return run;
}

bool standalone(const std::string& text, const DigitRun& run) {
  if (run.begin > 0 && glued(text[run.begin - 1])) return false;
  if (run.end < text.size() && glued(text[run.end])) return false;
  return true;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ApiError::ApiError(int status_, std::string body_)
    : LlmError("API error, status " + std::to_string(status_)),
      status(status_),
      body(std::move(body_)) {}

std::string serialize_request(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {
      {"model", req.model},
      {"temperature", req.temperature},
      {"messages", messages},
  };
  return body.dump();
}

struct ChatClient::Gate {
  explicit Gate(int slots) : sem(slots) {}
  std::counting_semaphore<> sem;
};

ChatClient::ChatClient(EndpointConfig config)
    : config_(std::move(config)),
      gate_(std::make_unique<Gate>(config_.max_in_flight > 0 ? config_.max_in_flight : 1)) {}

ChatClient::~ChatClient() = default;

ChatResponse ChatClient::complete(const ChatRequest& req) {
  gate_->sem.acquire();
  struct Release {
    Gate* g;
    ~Release() { g->sem.release(); }
  } release{gate_.get()};

  // base_url carries an optional path prefix ("https://host/v1").
  std::string host = config_.base_url;
  std::string prefix;
  size_t scheme = host.find("://");
  size_t slash = host.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    prefix = host.substr(slash);
    host = host.substr(0, slash);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  std::string path = prefix + "/chat/completions";

  httplib::Client cli(host);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string body = serialize_request(req);
  std::string last_failure;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Result res = cli.Post(path, headers, body, "application/json");
    bool transient;
    if (!res) {
      transient = true;
      last_failure = "transport: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded() || !parsed.contains("choices") ||
          !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw ProtocolError("malformed chat-completions body");
      }
      const json& choice = parsed["choices"][0];
      if (!choice.contains("message") || !choice["message"].contains("content") ||
          !choice["message"]["content"].is_string()) {
        throw ProtocolError("chat-completions reply lacks message content");
      }
      ChatResponse out;
      out.content = choice["message"]["content"].get<std::string>();
      out.finish_reason = choice.value("finish_reason", "");
      out.raw_body = res->body;
      out.attempts = attempt;
      return out;
    } else if (res->status == 429 || (res->status >= 500 && res->status < 600)) {
      transient = true;
      last_failure = "HTTP " + std::to_string(res->status);
    } else {
      throw ApiError(res->status, res->body);
    }
    if (transient && attempt < config_.max_attempts) {
      std::this_thread::sleep_for(config_.backoff_base * (1LL << (attempt - 1)));
    }
  }
  throw TransportError("retries exhausted, last failure: " + last_failure);
}

ParseResult parse_selection(const std::string& text, size_t menu_size) {
  std::string reasoning;
  size_t open = text.find("<reasoning>");
  if (open != std::string::npos) {
    size_t start = open + std::string("<reasoning>").size();
    size_t close = text.find("</reasoning>", start);
    if (close != std::string::npos) {
      reasoning = trim(text.substr(start, close - start));
    }
  }

  std::optional<DigitRun> run;
  std::string lower = lowercase(text);
  size_t anchor = lower.rfind("selected action");
  if (anchor != std::string::npos) {
    run = scan_run(text, anchor + std::string("selected action").size());
  } else {
    size_t from = 0;
    while (auto next = scan_run(text, from)) {
      if (standalone(text, *next)) run = *next;
      from = next->end;
    }
  }

  if (!run) return ParseError{ParseErrorKind::NoNumber, 0};
  long long value = run->value;
  if (value < 1 || static_cast<unsigned long long>(value) > menu_size) {
    return ParseError{ParseErrorKind::OutOfRange, value};
  }
  return Selection{static_cast<int>(value), reasoning};
}

QueryResult query_selection(ChatClient& client, const std::string& system_text,
                            const std::string& user_text, size_t menu_size) {
  const EndpointConfig& cfg = client.config();
  QueryResult result;

  ChatRequest req;
  req.model = cfg.model;
  req.temperature = cfg.temperature;
  req.messages = {{"system", system_text}, {"user", user_text}};

  ChatResponse resp = client.complete(req);
  result.log.exchanges.push_back({serialize_request(req), resp.raw_body, resp.content});
  ParseResult parsed = parse_selection(resp.content, menu_size);
  if (auto* sel = std::get_if<Selection>(&parsed)) {
    result.selection = *sel;
    result.log.path = QueryPath::Direct;
    return result;
  }

  req.messages.push_back(
      {"user", "Answer with the number of the selected action only."});
  resp = client.complete(req);
  result.log.exchanges.push_back({serialize_request(req), resp.raw_body, resp.content});
  parsed = parse_selection(resp.content, menu_size);
  if (auto* sel = std::get_if<Selection>(&parsed)) {
    result.selection = *sel;
    result.log.path = QueryPath::Reask;
    return result;
  }

  result.log.path = QueryPath::Fallback;
  return result;
}

const char* query_path_name(QueryPath path) {
  switch (path) {
    case QueryPath::Direct: return "direct";
    case QueryPath::Reask: return "reask";
    case QueryPath::Fallback: return "fallback";
  }
  return "direct";
}

}  // namespace scaffold

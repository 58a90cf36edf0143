#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace scaffold {

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 4;
};

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

struct ChatRequest {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::vector<ChatMessage> messages;
};

struct ChatResponse {
  std::string content;        // choices[0].message.content
  std::string finish_reason;
  std::string raw_body;
  int attempts = 1;
};

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network never reached a usable reply: connect/timeout failures, or
// transient HTTP statuses that survived every retry.
class TransportError : public LlmError {
 public:
  using LlmError::LlmError;
};

// Server answered with a definitive non-2xx (auth, bad request, ...).
class ApiError : public LlmError {
 public:
  ApiError(int status, std::string body);
  int status;
  std::string body;
};

// 2xx reply whose body does not follow the chat-completions schema.
class ProtocolError : public LlmError {
 public:
  using LlmError::LlmError;
};

std::string serialize_request(const ChatRequest& req);

// Thread-safe chat-completions client. Callers may share one instance
// across sessions; in-flight requests are capped at max_in_flight.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);
  ~ChatClient();
  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  ChatResponse complete(const ChatRequest& req);
  const EndpointConfig& config() const { return config_; }

 private:
  struct Gate;
  EndpointConfig config_;
  std::unique_ptr<Gate> gate_;
};

struct Selection {
  int index = 0;  // 1-based menu index
  std::string reasoning;
};

enum class ParseErrorKind { NoNumber, OutOfRange };

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::NoNumber;
  long long value = 0;  // offending integer for OutOfRange
};

using ParseResult = std::variant<Selection, ParseError>;

// Tolerant extraction of the chosen menu index from a model reply.
// The index is the first integer after the last occurrence of the
// "selected action" anchor; without the anchor, the last standalone
// integer in the text. Never throws.
ParseResult parse_selection(const std::string& text, size_t menu_size);

enum class QueryPath { Direct, Reask, Fallback };

struct Exchange {
  std::string request_body;   // serialized JSON as sent
  std::string response_body;  // raw body as received
  std::string content;        // extracted message text
};

struct QueryLog {
  std::vector<Exchange> exchanges;
  QueryPath path = QueryPath::Direct;
};

struct QueryResult {
  std::optional<Selection> selection;  // empty = fallback marker
  QueryLog log;
};

// One scaffolding query: ask, re-ask once on a malformed reply, and
// signal fallback if the second reply is malformed too. At most two
// model calls; transport/API errors propagate.
QueryResult query_selection(ChatClient& client, const std::string& system_text,
                            const std::string& user_text, size_t menu_size);

const char* query_path_name(QueryPath path);

}  // namespace scaffold

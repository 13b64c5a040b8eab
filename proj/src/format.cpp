#include "peng/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "peng/error.hpp"

namespace peng {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::too_few_points: return "too-few-points";
    case ErrorCode::non_finite_input: return "non-finite-input";
    case ErrorCode::evaluation_overflow: return "evaluation-overflow";
    case ErrorCode::out_of_order_epoch: return "out-of-order-epoch";
    case ErrorCode::first_epoch_mismatch: return "first-epoch-mismatch";
    case ErrorCode::duplicate_model: return "duplicate-model";
    case ErrorCode::unknown_model: return "unknown-model";
    case ErrorCode::session_finished: return "session-finished";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::missing_train_loss: return "missing-train-loss";
    case ErrorCode::empty_outcomes: return "empty-outcomes";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse_error,
                std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse_error,
                std::string(what) + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorCode::parse_error,
              std::string(what) + ": not a boolean: '" + std::string(text) + "'");
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n";
  auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace peng

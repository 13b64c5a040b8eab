#include "peng/keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "peng/error.hpp"
#include "peng/format.hpp"

namespace peng {

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view source) {
  KeyValueFile kv;
  kv.source_ = std::string(source);
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (auto hash = line.find(" #"); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (auto hash = line.find("\t#"); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::parse_error, kv.source_ + ":" + std::to_string(line_no) +
                                              ": expected key=value");
    }
    auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw Error(ErrorCode::parse_error,
                  kv.source_ + ":" + std::to_string(line_no) + ": empty key");
    }
    if (kv.contains(key)) {
      throw Error(ErrorCode::parse_error, kv.source_ + ":" + std::to_string(line_no) +
                                              ": duplicate key '" + key + "'");
    }
    kv.set(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool KeyValueFile::contains(std::string_view key) const {
  return values_.find(key) != values_.end();
}

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::require(std::string_view key) const {
  auto value = get(key);
  if (!value) {
    throw Error(ErrorCode::parse_error, source_ + ": missing key '" + std::string(key) + "'");
  }
  return *value;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  auto value = get(key);
  return value ? parse_double(*value, source_ + ": " + std::string(key)) : fallback;
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const {
  auto value = get(key);
  return value ? parse_int(*value, source_ + ": " + std::string(key)) : fallback;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const {
  auto value = get(key);
  return value ? parse_bool(*value, source_ + ": " + std::string(key)) : fallback;
}

void KeyValueFile::set(std::string key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    order_.push_back(key);
    values_.emplace(std::move(key), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& key : order_) {
    out += key;
    out += '=';
    out += values_.find(key)->second;
    out += '\n';
  }
  return out;
}

}  // namespace peng

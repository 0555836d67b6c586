#include "wastedata/landfill.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "wastedata/errors.hpp"

namespace wastedata {

using nlohmann::json;

void LandfillConfig::validate() const {
  if (capacity_bytes == 0) throw DomainError("landfill: capacity_bytes must be > 0");
  if (fade_lifetime_epochs == 0) throw DomainError("landfill: fade_lifetime_epochs must be >= 1");
}

Landfill::Landfill(LandfillConfig config) : config_(config) { config_.validate(); }

void Landfill::touch(std::map<std::string, Entry, std::less<>>::iterator it) {
  lru_.erase({it->second.last_access, it->first});
  it->second.last_access = epoch_;
  lru_.insert({epoch_, it->first});
}

void Landfill::erase(std::map<std::string, Entry, std::less<>>::iterator it) {
  lru_.erase({it->second.last_access, it->first});
  live_bytes_ -= it->second.value.size();
  entries_.erase(it);
}

PutResult Landfill::put(std::string key, std::string value) {
  if (log_) {
    TraceOp op{TraceOp::Kind::Put, key, value.size(), value};
    *log_ << format_trace_op(op) << '\n';
  }
  if (value.size() > config_.capacity_bytes) return PutResult::RejectedTooLarge;

  if (auto it = entries_.find(key); it != entries_.end()) erase(it);
  while (config_.capacity_bytes - live_bytes_ < value.size()) {
    auto victim = entries_.find(lru_.begin()->second);
    erase(victim);
    ++evictions_;
  }
  live_bytes_ += value.size();
  auto [it, _] = entries_.emplace(std::move(key), Entry{std::move(value), epoch_});
  lru_.insert({epoch_, it->first});
  return PutResult::Stored;
}

std::optional<std::string> Landfill::get(std::string_view key) {
  if (log_) *log_ << "GET " << encode_key(key) << '\n';
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  if (config_.refresh_on_read) touch(it);
  return it->second.value;
}

FadeStats Landfill::advance_epoch(std::uint64_t n) {
  if (n == 0) throw DomainError("landfill: advance_epoch needs n >= 1");
  if (log_) *log_ << "ADV " << n << '\n';
  epoch_ += n;
  FadeStats fs;
  if (epoch_ <= config_.fade_lifetime_epochs) return fs;
  // Entries with epoch - last_access > lifetime, i.e. last_access < cutoff.
  const std::uint64_t cutoff = epoch_ - config_.fade_lifetime_epochs;
  while (!lru_.empty() && lru_.begin()->first < cutoff) {
    auto it = entries_.find(lru_.begin()->second);
    ++fs.entries_faded;
    fs.bytes_reclaimed += it->second.value.size();
    erase(it);
  }
  fades_ += fs.entries_faded;
  return fs;
}

LandfillStats Landfill::stats() const {
  return {entries_.size(), live_bytes_, config_.capacity_bytes, epoch_, evictions_, fades_};
}

std::optional<std::uint64_t> Landfill::last_access_epoch(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.last_access;
}

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string hex_encode(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

std::string hex_decode(std::string_view hex, std::size_t line) {
  if (hex.size() % 2 != 0) throw DomainError("trace line " + std::to_string(line) + ": odd-length hex value");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_digit(hex[i]), lo = hex_digit(hex[i + 1]);
    if (hi < 0 || lo < 0) throw DomainError("trace line " + std::to_string(line) + ": bad hex value");
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

std::uint64_t parse_count(const std::string& tok, std::size_t line) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw DomainError("trace line " + std::to_string(line) + ": '" + tok + "' is not a non-negative integer");
  try {
    return std::stoull(tok);
  } catch (const std::out_of_range&) {
    throw DomainError("trace line " + std::to_string(line) + ": '" + tok + "' is out of range");
  }
}

}  // namespace

std::string encode_key(std::string_view key) {
  std::string out;
  for (unsigned char c : key) {
    if (c > 0x20 && c < 0x7f && c != '%' && c != '#') {
      out.push_back(static_cast<char>(c));
    } else {
      static constexpr char kHex[] = "0123456789ABCDEF";
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

std::string decode_key(std::string_view token) {
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '%') {
      if (i + 2 >= token.size())
        throw DomainError("bad percent escape in key '" + std::string(token) + "'");
      const int hi = hex_digit(token[i + 1]), lo = hex_digit(token[i + 2]);
      if (hi < 0 || lo < 0) throw DomainError("bad percent escape in key '" + std::string(token) + "'");
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 2;
    } else {
      out.push_back(token[i]);
    }
  }
  return out;
}

std::string filler_value(std::string_view key, std::uint64_t size) {
  std::string v(size, '\0');
  std::uint8_t x = static_cast<std::uint8_t>(key.size());
  for (unsigned char c : key) x = static_cast<std::uint8_t>(x * 31 + c);
  for (std::uint64_t i = 0; i < size; ++i) v[i] = static_cast<char>('a' + (x + i) % 26);
  return v;
}

std::vector<TraceOp> parse_trace(std::istream& in) {
  std::vector<TraceOp> ops;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    TraceOp op;
    op.line = lineno;
    const auto bad = [&](const std::string& why) {
      return DomainError("trace line " + std::to_string(lineno) + ": " + why);
    };
    if (tok[0] == "PUT") {
      if (tok.size() != 3 && tok.size() != 4) throw bad("PUT takes <key> <size> [<hex value>]");
      op.kind = TraceOp::Kind::Put;
      op.key = decode_key(tok[1]);
      op.size = parse_count(tok[2], lineno);
      if (tok.size() == 4) {
        op.value = hex_decode(tok[3], lineno);
        if (op.value->size() != op.size) throw bad("value length does not match size");
      }
    } else if (tok[0] == "GET") {
      if (tok.size() != 2) throw bad("GET takes <key>");
      op.kind = TraceOp::Kind::Get;
      op.key = decode_key(tok[1]);
    } else if (tok[0] == "ADV") {
      if (tok.size() != 2) throw bad("ADV takes <n>");
      op.kind = TraceOp::Kind::Advance;
      op.epochs = parse_count(tok[1], lineno);
      if (op.epochs == 0) throw bad("ADV needs n >= 1");
    } else {
      throw bad("unknown operation '" + tok[0] + "'");
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

std::string format_trace_op(const TraceOp& op) {
  switch (op.kind) {
    case TraceOp::Kind::Put: {
      std::string s = "PUT " + encode_key(op.key) + " " + std::to_string(op.size);
      if (op.value && !op.value->empty()) s += " " + hex_encode(*op.value);
      return s;
    }
    case TraceOp::Kind::Get: return "GET " + encode_key(op.key);
    case TraceOp::Kind::Advance: return "ADV " + std::to_string(op.epochs);
  }
  return {};
}

json to_json(const LandfillStats& s) {
  return {{"live_entries", s.live_entries},       {"live_bytes", s.live_bytes},
          {"capacity_bytes", s.capacity_bytes},   {"current_epoch", s.current_epoch},
          {"lifetime_evictions", s.lifetime_evictions}, {"lifetime_fades", s.lifetime_fades}};
}

json apply(Landfill& store, const TraceOp& op) {
  json ev;
  switch (op.kind) {
    case TraceOp::Kind::Put: {
      auto value = op.value ? *op.value : filler_value(op.key, op.size);
      const auto r = store.put(op.key, std::move(value));
      ev = {{"op", "put"}, {"key", encode_key(op.key)}, {"size", op.size},
            {"result", r == PutResult::Stored ? "stored" : "rejected_too_large"}};
      break;
    }
    case TraceOp::Kind::Get: {
      const auto v = store.get(op.key);
      ev = {{"op", "get"}, {"key", encode_key(op.key)}, {"result", v ? "hit" : "faded"}};
      if (v) ev["size"] = v->size();
      break;
    }
    case TraceOp::Kind::Advance: {
      const auto fs = store.advance_epoch(op.epochs);
      ev = {{"op", "adv"}, {"n", op.epochs}, {"entries_faded", fs.entries_faded},
            {"bytes_reclaimed", fs.bytes_reclaimed}};
      break;
    }
  }
  ev["line"] = op.line;
  ev["stats"] = to_json(store.stats());
  return ev;
}

Landfill replay_log(std::istream& log, LandfillConfig config) {
  Landfill store(config);
  for (const auto& op : parse_trace(log)) {
    switch (op.kind) {
      case TraceOp::Kind::Put:
        store.put(op.key, op.value ? *op.value : filler_value(op.key, op.size));
        break;
      case TraceOp::Kind::Get: store.get(op.key); break;
      case TraceOp::Kind::Advance: store.advance_epoch(op.epochs); break;
    }
  }
  return store;
}

}  // namespace wastedata

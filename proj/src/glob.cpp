#include "wastedata/glob.hpp"

#include "wastedata/errors.hpp"

namespace wastedata {

Glob::Glob(std::string pattern) : pattern_(std::move(pattern)) {
  if (pattern_.empty()) throw DomainError("empty glob pattern");
  basename_only_ = pattern_.find('/') == std::string::npos;

  const std::string& p = pattern_;
  for (std::size_t i = 0; i < p.size();) {
    const char c = p[i];
    if (c == '\\') {
      if (i + 1 >= p.size()) throw DomainError("glob '" + p + "': trailing backslash");
      tokens_.push_back(make_token(Op::Literal, p[i + 1]));
      i += 2;
    } else if (c == '*') {
      if (i + 1 < p.size() && p[i + 1] == '*') {
        i += 2;
        while (i < p.size() && p[i] == '*') ++i;
        if (i < p.size() && p[i] == '/') {
          tokens_.push_back(make_token(Op::DoubleStarSlash));
          ++i;
        } else {
          tokens_.push_back(make_token(Op::DoubleStar));
        }
      } else {
        tokens_.push_back(make_token(Op::Star));
        ++i;
      }
    } else if (c == '?') {
      tokens_.push_back(make_token(Op::AnyChar));
      ++i;
    } else if (c == '[') {
      Token t = make_token(Op::Class);
      std::size_t j = i + 1;
      if (j < p.size() && (p[j] == '!' || p[j] == '^')) {
        t.negated = true;
        ++j;
      }
      bool first = true;
      bool closed = false;
      while (j < p.size()) {
        char lo = p[j];
        if (lo == ']' && !first) {
          closed = true;
          break;
        }
        if (lo == '\\' && j + 1 < p.size()) lo = p[++j];
        char hi = lo;
        if (j + 2 < p.size() && p[j + 1] == '-' && p[j + 2] != ']') {
          hi = p[j + 2];
          if (hi == '\\' && j + 3 < p.size()) {
            hi = p[j + 3];
            ++j;
          }
          j += 2;
          if (hi < lo) throw DomainError("glob '" + p + "': reversed range in class");
        }
        t.ranges.emplace_back(lo, hi);
        first = false;
        ++j;
      }
      if (!closed) throw DomainError("glob '" + p + "': unterminated character class");
      tokens_.push_back(std::move(t));
      i = j + 1;
    } else {
      tokens_.push_back(make_token(Op::Literal, c));
      ++i;
    }
  }
}

bool Glob::matches(std::string_view relative_path) const {
  if (basename_only_) {
    const auto slash = relative_path.rfind('/');
    if (slash != std::string_view::npos) relative_path.remove_prefix(slash + 1);
  }
  return match_tokens(relative_path);
}

// Dynamic programming over (token, text position); reach[j] is true when the
// tokens consumed so far can match text[0, j).
bool Glob::match_tokens(std::string_view text) const {
  const std::size_t n = text.size();
  std::vector<char> reach(n + 1, 0), next(n + 1, 0);
  reach[0] = 1;

  for (const Token& t : tokens_) {
    std::fill(next.begin(), next.end(), 0);
    switch (t.op) {
      case Op::Literal:
        for (std::size_t j = 0; j < n; ++j)
          if (reach[j] && text[j] == t.literal) next[j + 1] = 1;
        break;
      case Op::AnyChar:
        for (std::size_t j = 0; j < n; ++j)
          if (reach[j] && text[j] != '/') next[j + 1] = 1;
        break;
      case Op::Class:
        for (std::size_t j = 0; j < n; ++j) {
          if (!reach[j] || text[j] == '/') continue;
          bool in = false;
          for (auto [lo, hi] : t.ranges)
            if (text[j] >= lo && text[j] <= hi) in = true;
          if (in != t.negated) next[j + 1] = 1;
        }
        break;
      case Op::Star:
        for (std::size_t j = 0; j <= n; ++j) {
          if (reach[j]) next[j] = 1;
          if (j > 0 && next[j - 1] && text[j - 1] != '/') next[j] = 1;
        }
        break;
      case Op::DoubleStar:
        for (std::size_t j = 0; j <= n; ++j)
          if (reach[j] || (j > 0 && next[j - 1])) next[j] = 1;
        break;
      case Op::DoubleStarSlash:
        // Zero directories, or any run ending in '/'.
        for (std::size_t j = 0; j <= n; ++j) {
          if (reach[j]) next[j] = 1;
        }
        {
          bool open = false;
          for (std::size_t j = 0; j < n; ++j) {
            if (reach[j]) open = true;
            if (open && text[j] == '/') next[j + 1] = 1;
          }
        }
        break;
    }
    reach.swap(next);
  }
  return reach[n] != 0;
}

bool matches_any(const std::vector<Glob>& globs, std::string_view relative_path) {
  for (const auto& g : globs)
    if (g.matches(relative_path)) return true;
  return false;
}

}  // namespace wastedata

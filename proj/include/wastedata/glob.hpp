#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wastedata {

// Shell-style path glob.
//
//   *     any run of characters except '/'
//   **    any run of characters including '/'; "**/" also matches nothing
//   ?     one character except '/'
//   [..]  character class, with ranges and leading '!' or '^' for negation
//   \c    literal c
//
// A pattern without '/' is matched against the final path component only,
// so "*.aux" matches "paper/paper.aux". A pattern containing '/' is anchored
// at the start of the relative path.
class Glob {
 public:
  // Throws DomainError on an empty pattern, an unterminated class or a
  // trailing backslash.
  explicit Glob(std::string pattern);

  bool matches(std::string_view relative_path) const;
  const std::string& pattern() const { return pattern_; }

 private:
  enum class Op { Literal, AnyChar, Star, DoubleStar, DoubleStarSlash, Class };
  struct Token {
    Op op;
    char literal = 0;
    bool negated = false;
    std::vector<std::pair<char, char>> ranges;
  };
  static Token make_token(Op op, char literal = 0) { return Token{op, literal, false, {}}; }

  bool match_tokens(std::string_view text) const;

  std::string pattern_;
  std::vector<Token> tokens_;
  bool basename_only_ = false;
};

bool matches_any(const std::vector<Glob>& globs, std::string_view relative_path);

}  // namespace wastedata

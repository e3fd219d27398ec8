#pragma once

// Shared tokenizer for the program, query, and event languages.

#include <string>
#include <string_view>
#include <vector>

#include "gdl/error.hpp"

namespace gdl::detail {

enum class Tok { Ident, Integer, Real, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, punctuation, decoded string, or number spelling
  SourcePos pos;
};

struct LexOptions {
  std::string_view line_comment = "%";
  char string_quote = '"';
};

std::vector<Token> tokenize(std::string_view src, const LexOptions& opts = {});

std::string describe(const Token& t);

// Cursor over a token vector with the helpers every parser here needs.
class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == Tok::Punct && t.text == p;
  }
  // Case-insensitive keyword match on identifiers.
  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const;
  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  bool accept_keyword(std::string_view kw) {
    if (!is_keyword(kw)) return false;
    next();
    return true;
  }
  const Token& expect_punct(std::string_view p);
  void expect_keyword(std::string_view kw);
  const Token& expect_ident(std::string_view what = "identifier");

  [[noreturn]] void fail(const std::vector<std::string>& expected) const;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace gdl::detail

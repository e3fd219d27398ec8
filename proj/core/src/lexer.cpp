#include "lexer.hpp"

#include <cctype>

namespace gdl::detail {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace

std::vector<Token> tokenize(std::string_view src, const LexOptions& opts) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (!opts.line_comment.empty() && src.substr(i).starts_with(opts.line_comment)) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          real = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.push_back({real ? Tok::Real : Tok::Integer, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (c == static_cast<unsigned char>(opts.string_quote)) {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        char d = src[j];
        if (d == opts.string_quote) {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\' && j + 1 < src.size()) {
          char e = src[j + 1];
          switch (e) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            default: text += e;
          }
          j += 2;
          continue;
        }
        if (d == '\n') break;
        text += d;
        ++j;
      }
      if (!closed) throw Error(ErrorKind::SyntaxError, "unterminated string literal", pos);
      out.push_back({Tok::String, std::move(text), pos});
      advance(j - i);
      continue;
    }
    static constexpr std::string_view two_char[] = {":-", "<=", ">=", "!=", "<>"};
    bool matched = false;
    for (auto p : two_char) {
      if (src.substr(i).starts_with(p)) {
        out.push_back({Tok::Punct, std::string(p), pos});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view one_char = "(),.+-*/=<>[];";
    if (one_char.find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, static_cast<char>(c)), pos});
      advance(1);
      continue;
    }
    throw Error(ErrorKind::SyntaxError,
                "unexpected character '" + std::string(1, static_cast<char>(c)) + "'", pos);
  }
  out.push_back({Tok::End, "", SourcePos{line, col}});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

bool TokenCursor::is_keyword(std::string_view kw, std::size_t ahead) const {
  const auto& t = peek(ahead);
  if (t.kind != Tok::Ident || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(t.text[i])) !=
        std::tolower(static_cast<unsigned char>(kw[i]))) {
      return false;
    }
  }
  return true;
}

const Token& TokenCursor::expect_punct(std::string_view p) {
  if (!is_punct(p)) fail({"'" + std::string(p) + "'"});
  return next();
}

void TokenCursor::expect_keyword(std::string_view kw) {
  if (!is_keyword(kw)) fail({std::string(kw)});
  next();
}

const Token& TokenCursor::expect_ident(std::string_view what) {
  if (peek().kind != Tok::Ident) fail({std::string(what)});
  return next();
}

void TokenCursor::fail(const std::vector<std::string>& expected) const {
  std::string msg = "expected ";
  if (expected.size() > 1) msg += "one of {";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) msg += ", ";
    msg += expected[i];
  }
  if (expected.size() > 1) msg += "}";
  msg += ", found " + describe(peek());
  throw Error(ErrorKind::SyntaxError, msg, peek().pos);
}

}  // namespace gdl::detail

#include "biaskit/annotate/prompt.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <vector>

namespace biaskit::annotate {

namespace {

constexpr std::string_view kVpPrompt =
    "Using the following article, answer each of the following questions using only one word.\n"
    "\n"
    "Q1) Does the article contain a victim? If so, what racial group does the victim belong to? "
    "Pick one of the following: ['Asian', 'Middle Eastern', 'Black', 'White', 'Indian', 'Latinx', 'Unspecified'].\n"
    "If the article does not contain a victim, answer with 'No victim'.\n"
    "\n"
    "Q2) Does the article contain a perpetrator? If so, what racial group does the perpetrator belong to? "
    "Pick one of the following: ['Asian', 'Middle Eastern', 'Black', 'White', 'Indian', 'Latinx', 'Unspecified'].\n"
    "If the article does not contain a perpetrator, answer with 'No perpetrator'.\n"
    "\n"
    "Do not add any additional information from your end, answer each of the questions using only one word.\n"
    "\n"
    "Return your response in the following JSON format:\n"
    "{\n"
    "'victim' : [Your response],\n"
    "'perpetrator' : [Your response]\n"
    "}\n"
    "\n"
    "ARTICLE\n";

enum class Tok { LBrace, RBrace, LBracket, RBracket, Colon, Comma, Str, End };

struct Token {
  Tok kind;
  std::string text;
};

class Lexer {
 public:
  Lexer(std::string_view s, const std::string& raw) : s_(s), raw_(raw) {}

  Token next() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) return {Tok::End, ""};
    const char c = s_[pos_];
    switch (c) {
      case '{': ++pos_; return {Tok::LBrace, "{"};
      case '}': ++pos_; return {Tok::RBrace, "}"};
      case '[': ++pos_; return {Tok::LBracket, "["};
      case ']': ++pos_; return {Tok::RBracket, "]"};
      case ':': ++pos_; return {Tok::Colon, ":"};
      case ',': ++pos_; return {Tok::Comma, ","};
      case '"':
      case '\'': return quoted(c);
      default: return bare();
    }
  }

 private:
  Token quoted(char q) {
    std::string out;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != q) {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) throw MalformedAnnotation("unterminated string in annotator reply", raw_);
    ++pos_;
    return {Tok::Str, out};
  }

  Token bare() {
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '{' || c == '}' || c == '[' || c == ']' || c == ':' || c == ',' || c == '"' || c == '\'') break;
      out.push_back(c);
      ++pos_;
    }
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return {Tok::Str, out};
  }

  std::string_view s_;
  const std::string& raw_;
  std::size_t pos_ = 0;
};

std::optional<VpRole> role_from(const std::string& value, bool victim) {
  const std::string key = fold_label(value);
  if (key == "unspecified") return VpRole::Unspecified;
  if (key == (victim ? "novictim" : "noperpetrator")) return VpRole::Absent;
  if (auto r = parse_label<Race6>(value)) return from_race(*r);
  return std::nullopt;
}

}  // namespace

std::string build_vp_prompt(std::string_view article_text) {
  std::string out(kVpPrompt);
  out.append(article_text);
  return out;
}

std::string format_vp_response(const VictimPerpRecord& r) {
  return "{\"victim\": \"" + victim_answer(r.victim) + "\", \"perpetrator\": \"" + perpetrator_answer(r.perpetrator) +
         "\"}";
}

VictimPerpRecord parse_vp_response(std::string_view raw_view) {
  const std::string raw(raw_view);
  const auto open = raw_view.find('{');
  if (open == std::string_view::npos) throw MalformedAnnotation("no JSON object in annotator reply", raw);
  Lexer lex(raw_view.substr(open), raw);
  auto expect = [&](Tok kind, const char* what) {
    auto t = lex.next();
    if (t.kind != kind) throw MalformedAnnotation(std::string("annotator reply: expected ") + what, raw);
    return t;
  };
  expect(Tok::LBrace, "'{'");
  std::map<std::string, std::string> fields;
  for (auto t = lex.next();; t = lex.next()) {
    if (t.kind == Tok::RBrace) break;
    if (t.kind != Tok::Str) throw MalformedAnnotation("annotator reply: expected a key", raw);
    const std::string key = fold_label(t.text);
    expect(Tok::Colon, "':'");
    auto v = lex.next();
    std::string value;
    if (v.kind == Tok::LBracket) {
      value = expect(Tok::Str, "a value").text;
      expect(Tok::RBracket, "']'");
    } else if (v.kind == Tok::Str) {
      value = v.text;
    } else {
      throw MalformedAnnotation("annotator reply: expected a value for '" + t.text + "'", raw);
    }
    if (!fields.emplace(key, value).second) throw MalformedAnnotation("annotator reply: duplicate key '" + t.text + "'", raw);
    auto sep = lex.next();
    if (sep.kind == Tok::RBrace) break;
    if (sep.kind != Tok::Comma) throw MalformedAnnotation("annotator reply: expected ',' or '}'", raw);
  }

  VictimPerpRecord r;
  for (const auto& [key, victim] : {std::pair{"victim", true}, std::pair{"perpetrator", false}}) {
    auto it = fields.find(key);
    if (it == fields.end()) throw MalformedAnnotation(std::string("annotator reply lacks '") + key + "'", raw);
    auto role = role_from(it->second, victim);
    if (!role) throw MalformedAnnotation(std::string("annotator reply: '") + it->second + "' is not a valid " + key, raw);
    (victim ? r.victim : r.perpetrator) = *role;
  }
  return r;
}

}  // namespace biaskit::annotate

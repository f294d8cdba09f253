#include "biaskit/ingest/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

#include "biaskit/core/hash.hpp"

namespace biaskit::ingest {

namespace {

constexpr std::array<std::string_view, 16> kVoidTags{"area", "base", "br",    "col",   "embed", "hr",
                                                     "img",  "input", "link", "meta", "param", "source",
                                                     "track", "wbr",  "!doctype", "frame"};
constexpr std::array<std::string_view, 4> kRawTextTags{"script", "style", "noscript", "template"};

bool is_void(std::string_view tag) { return std::find(kVoidTags.begin(), kVoidTags.end(), tag) != kVoidTags.end(); }
bool is_raw(std::string_view tag) { return std::find(kRawTextTags.begin(), kRawTextTags.end(), tag) != kRawTextTags.end(); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view s) : s_(s), root_(std::make_unique<HtmlNode>()) { stack_.push_back(root_.get()); }

  std::unique_ptr<HtmlNode> build() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '<') {
        if (s_.compare(pos_, 4, "<!--") == 0) {
          const auto end = s_.find("-->", pos_ + 4);
          pos_ = end == std::string_view::npos ? s_.size() : end + 3;
        } else if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
          end_tag();
        } else if (pos_ + 1 < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '!')) {
          start_tag();
        } else {
          text_until_tag();
        }
      } else {
        text_until_tag();
      }
    }
    return std::move(root_);
  }

 private:
  void add_text(std::string_view raw) {
    if (raw.empty()) return;
    auto node = std::make_unique<HtmlNode>();
    node->text = decode_entities(raw);
    node->parent = stack_.back();
    if (!node->text.empty()) stack_.back()->children.push_back(std::move(node));
  }

  void text_until_tag() {
    const auto start = pos_;
    auto next = s_.find('<', pos_ + 1);
    if (next == std::string_view::npos) next = s_.size();
    pos_ = next;
    add_text(s_.substr(start, next - start));
  }

  std::string read_name() {
    const auto start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '>' &&
           s_[pos_] != '/' && s_[pos_] != '=')
      ++pos_;
    return lower(s_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void start_tag() {
    ++pos_;
    auto node = std::make_unique<HtmlNode>();
    node->tag = read_name();
    bool self_closing = false;
    while (pos_ < s_.size()) {
      skip_space();
      if (pos_ >= s_.size()) break;
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (s_[pos_] == '/') {
        self_closing = true;
        ++pos_;
        continue;
      }
      std::string name = read_name();
      if (name.empty()) {
        ++pos_;
        continue;
      }
      skip_space();
      std::string value;
      if (pos_ < s_.size() && s_[pos_] == '=') {
        ++pos_;
        skip_space();
        if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
          const char q = s_[pos_++];
          const auto end = s_.find(q, pos_);
          const auto stop = end == std::string_view::npos ? s_.size() : end;
          value = decode_entities(s_.substr(pos_, stop - pos_));
          pos_ = std::min(s_.size(), stop + 1);
        } else {
          const auto start = pos_;
          while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '>') ++pos_;
          value = decode_entities(s_.substr(start, pos_ - start));
        }
      }
      node->attrs.emplace(std::move(name), std::move(value));
    }
    const std::string tag = node->tag;
    node->parent = stack_.back();
    HtmlNode* raw = node.get();
    stack_.back()->children.push_back(std::move(node));
    if (is_raw(tag)) {
      const auto close = lower(s_.substr(pos_)).find("</" + tag);
      pos_ = close == std::string::npos ? s_.size() : pos_ + close;
      if (pos_ < s_.size()) {
        const auto gt = s_.find('>', pos_);
        pos_ = gt == std::string_view::npos ? s_.size() : gt + 1;
      }
      return;
    }
    if (!self_closing && !is_void(tag)) stack_.push_back(raw);
  }

  void end_tag() {
    pos_ += 2;
    const std::string name = read_name();
    const auto gt = s_.find('>', pos_);
    pos_ = gt == std::string_view::npos ? s_.size() : gt + 1;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == name) {
        stack_.resize(i);
        return;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::unique_ptr<HtmlNode> root_;
  std::vector<HtmlNode*> stack_;
};

}  // namespace

std::string HtmlNode::attr(const std::string& name) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? std::string() : it->second;
}

bool HtmlNode::has_class(std::string_view cls) const {
  const std::string classes = attr("class");
  std::size_t pos = 0;
  while (pos < classes.size()) {
    while (pos < classes.size() && std::isspace(static_cast<unsigned char>(classes[pos]))) ++pos;
    auto end = pos;
    while (end < classes.size() && !std::isspace(static_cast<unsigned char>(classes[end]))) ++end;
    if (std::string_view(classes).substr(pos, end - pos) == cls) return true;
    pos = end;
  }
  return false;
}

std::string HtmlNode::text_content() const {
  if (tag.empty() && !text.empty()) return text;
  std::string out;
  for (const auto& c : children) out += c->text_content();
  return out;
}

std::string decode_entities(std::string_view s) {
  static const std::map<std::string, std::uint32_t, std::less<>> named{
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
      {"nbsp", 0xA0},   {"mdash", 0x2014}, {"ndash", 0x2013}, {"hellip", 0x2026}, {"rsquo", 0x2019},
      {"lsquo", 0x2018}, {"rdquo", 0x201D}, {"ldquo", 0x201C}, {"copy", 0xA9}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    std::uint32_t cp = 0;
    bool ok = false;
    if (!name.empty() && name[0] == '#') {
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      const auto digits = name.substr(hex ? 2 : 1);
      ok = !digits.empty();
      for (char c : digits) {
        const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                      : hex && std::isxdigit(static_cast<unsigned char>(c))
                          ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                          : -1;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
    } else if (auto it = named.find(name); it != named.end()) {
      cp = it->second;
      ok = true;
    }
    if (!ok) {
      out.push_back('&');
      continue;
    }
    append_utf8(out, cp);
    i = semi;
  }
  return out;
}

std::unique_ptr<HtmlNode> parse_html(std::string_view html) { return TreeBuilder(html).build(); }

void visit(const HtmlNode& root, const std::function<void(const HtmlNode&)>& fn) {
  fn(root);
  for (const auto& c : root.children) visit(*c, fn);
}

std::vector<const HtmlNode*> find_all(const HtmlNode& root, std::string_view tag) {
  std::vector<const HtmlNode*> out;
  visit(root, [&](const HtmlNode& n) {
    if (n.tag == tag) out.push_back(&n);
  });
  return out;
}

std::string layout_fingerprint(const HtmlNode& root) {
  std::string outline;
  int n = 0;
  visit(root, [&](const HtmlNode& node) {
    if (node.tag.empty() || n >= 64) return;
    ++n;
    outline += node.tag;
    const auto cls = node.attr("class");
    if (!cls.empty()) outline += "." + cls;
    outline += ">";
  });
  return short_hash(outline);
}

}  // namespace biaskit::ingest

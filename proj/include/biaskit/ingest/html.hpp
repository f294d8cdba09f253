#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace biaskit::ingest {

// Forgiving HTML tree: unknown or stray end tags are ignored, unclosed
// elements are closed by their ancestors' end tags, script/style/noscript
// content and comments are dropped.
struct HtmlNode {
  std::string tag;  // lowercase; empty for text nodes and the document root
  std::map<std::string, std::string> attrs;
  std::string text;  // text nodes only, entities decoded
  std::vector<std::unique_ptr<HtmlNode>> children;
  HtmlNode* parent = nullptr;

  bool is_text() const { return tag.empty() && parent != nullptr; }
  std::string attr(const std::string& name) const;
  bool has_class(std::string_view cls) const;
  std::string text_content() const;
};

std::unique_ptr<HtmlNode> parse_html(std::string_view html);

std::string decode_entities(std::string_view s);

void visit(const HtmlNode& root, const std::function<void(const HtmlNode&)>& fn);
std::vector<const HtmlNode*> find_all(const HtmlNode& root, std::string_view tag);

// Stable digest of the tag/class outline of the first elements, used to
// triage pages whose layout no parser recognizes.
std::string layout_fingerprint(const HtmlNode& root);

}  // namespace biaskit::ingest

#pragma once

#include <string>
#include <string_view>

#include "biaskit/annotate/types.hpp"
#include "biaskit/core/error.hpp"

namespace biaskit::annotate {

class MalformedAnnotation : public ValidationError {
 public:
  MalformedAnnotation(const std::string& what, std::string raw) : ValidationError(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Victim/perpetrator prompt followed by the article text.
std::string build_vp_prompt(std::string_view article_text);

// Accepts the reply with surrounding prose, single or double quotes, bare
// words and one-element lists as values. Keys and values are matched
// case-insensitively.
VictimPerpRecord parse_vp_response(std::string_view raw);

// Canonical reply text, e.g. {"victim": "Asian", "perpetrator": "No perpetrator"}.
std::string format_vp_response(const VictimPerpRecord& r);

}  // namespace biaskit::annotate

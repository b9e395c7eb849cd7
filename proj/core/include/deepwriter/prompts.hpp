#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepwriter {

enum class TemplateName { Rewrite, Decompose, SectionTitles, SectionDraft, Cluster, SectionContent, Summarize };

/// One of the seven writing prompts. Placeholders are written {name}.
struct PromptTemplate {
  TemplateName name;
  std::string_view id;
  std::string_view body;
  std::vector<std::string_view> parameters;
};

const PromptTemplate& prompt_template(TemplateName name);
std::span<const PromptTemplate> all_templates();
std::optional<TemplateName> parse_template_name(std::string_view id) noexcept;

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Substitutes every declared placeholder. Bound values are inserted
/// literally and never re-scanned. Throws MissingBinding.
std::string render(TemplateName name, const Bindings& bindings);

/// Strips "1." / "1)" / "-" / "*" / bullet markers, trims, drops empty lines.
/// Throws MalformedResponse when the item count is outside [min_items, max_items].
std::vector<std::string> parse_numbered_list(std::string_view response, std::size_t min_items,
                                             std::size_t max_items);

std::string format_numbered_list(std::span<const std::string> items);

}  // namespace deepwriter

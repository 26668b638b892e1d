#pragma once

#include <map>
#include <string>
#include <vector>

#include "virtree/defs.hpp"
#include "virtree/model.hpp"
#include "virtree/virtual_model.hpp"

namespace virtree {

struct Instantiation {
    std::vector<Widget> widgets;  // synthesized sibling sequence
    std::map<std::string, std::string> captures;
};

/// Fills missing optional properties in declaration order via their
/// default expressions; throws when a required property is absent.
std::map<std::string, std::string> resolve_properties(
    const VirtualWidgetDef& def, const std::map<std::string, std::string>& props);

/// Instantiates a pattern as fresh native widgets: the pattern tree is
/// cloned (node ids seed the widget ids), match and Default.* values are
/// set verbatim, then every binding equation is applied in reverse
/// (native property <- virtual property). Repeated groups emit the items
/// spelled out in the pattern.
Instantiation instantiate(const VirtualWidgetDef& def, int pattern_index,
                          const std::map<std::string, std::string>& props,
                          IdAllocator& ids);

/// Re-synthesizes the node under the target pattern, preserving native
/// widget state: a widget whose pattern-node id exists in both the source
/// and the target pattern keeps its identifier and starts from a full
/// copy of the source widget's properties before match values and
/// reverse equations are overlaid; Default.* values apply only to widgets
/// with no source counterpart. Updates pattern index, capture map and
/// provenance in place and clears the dirty flag.
void switch_pattern(VirtualNode& node, const VirtualWidgetDef& def, int target_index,
                    IdAllocator& ids);

/// Updates one virtual property and pushes it through every equation of
/// the current pattern onto the provenance widgets in place. The node
/// only becomes dirty when there is no provenance to keep consistent.
void set_virtual_property(VirtualNode& node, const VirtualWidgetDef& def,
                          std::string_view prop, std::string value);

const VirtualWidgetDef* find_def(const std::vector<VirtualWidgetDef>& defs,
                                 std::string_view name);

} // namespace virtree

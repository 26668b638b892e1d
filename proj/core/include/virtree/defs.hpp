#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "virtree/metamodel.hpp"
#include "virtree/model.hpp"

namespace virtree {

/// Default value expression for an optional virtual property.
struct DefaultExpr {
    enum class Kind { Literal, PropRef, GetLabelFor };
    Kind kind = Kind::Literal;
    std::string text;  // literal text or referenced property name
};

struct PropertyDecl {
    enum class Type { Expression, String };
    std::string name;
    Type type = Type::String;
    std::optional<DefaultExpr> default_expr;

    bool is_required() const { return !default_expr.has_value(); }
};

/// One node of a simplified native tree used for matching and synthesis.
struct PatternNode {
    std::string class_name;
    std::string id;  // empty when the node is not captured
    PropertyBag match_properties;    // equality conditions
    PropertyBag default_properties;  // synthesis-only values
    std::vector<PatternNode> children;
    bool repeated = false;  // star group over this node and its subtree
};

/// Bidirectional property binding `virtual_prop = node_id.native_prop`.
struct Equation {
    std::string virtual_prop;
    std::string node_id;
    std::string native_prop;
};

/// A pattern matches a sequence of sibling widgets.
struct Pattern {
    int index = 0;  // 1-based position within the definition
    std::vector<PatternNode> root_sequence;
    std::vector<Equation> bindings;

    const Equation* find_binding(std::string_view virtual_prop) const;
};

struct VirtualWidgetDef {
    std::string name;
    std::vector<PropertyDecl> properties;
    std::vector<Pattern> patterns;
    int priority_rank = 0;  // global order across definitions (load order)
    std::string source_path;

    const PropertyDecl* find_property(std::string_view name) const;
    const Pattern* find_pattern(int index) const;
};

/// Loads definition files (`<VirtualWidget>` XML) from explicit paths.
/// Priority rank follows the argument order. Syntax problems throw;
/// semantic problems are left for validate_defs.
std::vector<VirtualWidgetDef> load_defs(const std::vector<std::string>& files);

/// Loads every *.xml in a directory, sorted by file name.
std::vector<VirtualWidgetDef> load_defs_dir(const std::string& directory);

/// Checks definitions against the native metamodel. Empty result means:
/// every required property is bound in every pattern, node classes and
/// containment are valid, equations resolve, match conditions name
/// enumerated properties with declared values, and repetition is neither
/// nested nor carries captured ids.
std::vector<Diagnostic> validate_defs(const std::vector<VirtualWidgetDef>& defs,
                                      const Metamodel& mm);

/// Evaluates a default expression over already-resolved properties.
/// GetLabelFor humanizes a model expression: the segment after the last
/// '.', split at lower-to-upper case boundaries and underscores, all
/// words lower-cased, first word capitalized, joined with spaces.
std::string eval_default(const DefaultExpr& expr,
                         const std::map<std::string, std::string>& resolved);

/// The humanization rule backing GetLabelFor.
std::string humanize_expression(std::string_view expression);

} // namespace virtree

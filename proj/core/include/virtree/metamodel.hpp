#pragma once

#include <optional>
#include <string>
#include <vector>

#include "virtree/model.hpp"

namespace virtree {

enum class PropertyType {
    Text,
    Expression,
    BoolLiteral,  // fixed enumeration {true, false}
    Enum,
};

struct ClassProperty {
    std::string name;
    PropertyType type = PropertyType::Text;
    std::vector<std::string> enum_values;  // non-empty only for Enum

    /// True for types whose value space is a fixed enumeration; only these
    /// may appear in pattern match conditions.
    bool is_enumerated() const {
        return type == PropertyType::BoolLiteral || type == PropertyType::Enum;
    }
    bool allows_value(std::string_view value) const;
};

struct WidgetClass {
    std::string name;
    bool is_container = false;
    /// Class name the container accepts as children, or "Widget" for any.
    std::string child_constraint;
    bool is_root = false;
    std::vector<ClassProperty> properties;

    const ClassProperty* find_property(std::string_view name) const;
};

/// Native widget class declarations plus containment.
class Metamodel {
public:
    void add_class(WidgetClass cls);  // throws on duplicates
    const WidgetClass* find_class(std::string_view name) const;
    const std::vector<WidgetClass>& classes() const { return classes_; }
    const std::string& root_class() const { return root_class_; }
    void set_root_class(std::string name) { root_class_ = std::move(name); }

private:
    std::vector<WidgetClass> classes_;
    std::string root_class_;
};

struct Diagnostic {
    std::string message;
    std::string widget_id;  // empty when not tied to one widget
};

/// Virtual widget class derived from a definition: declared properties
/// plus the implicit integer `Pattern` selector.
struct VirtualClass {
    std::string name;
    std::vector<std::string> properties;  // includes "Pattern", last
};

/// The native metamodel with containment relaxed to the Widget base,
/// extended with one class per virtual widget definition.
struct VirtualMetamodel {
    Metamodel base;
    std::vector<VirtualClass> virtual_classes;

    const VirtualClass* find_virtual(std::string_view name) const;
};

/// Parses the line-oriented declaration format:
///   class <Name> (leaf | container of <Child>) [root] [props n:t,...]
/// Property types: text, expression, bool, enum(v1|v2|...).
/// Blank lines and lines starting with '#' are ignored.
Metamodel load_metamodel(std::string_view text);
Metamodel load_metamodel_file(const std::string& path);

/// Empty result iff every widget class exists, containment and leaf-ness
/// hold, and enumerated properties carry declared values when present.
std::vector<Diagnostic> validate_model(const Model& model, const Metamodel& mm);

// forward declaration; definitions live in defs.hpp
struct VirtualWidgetDef;

/// Builds the virtual metamodel: relaxes every container to accept any
/// Widget and appends one virtual class per definition. Throws when a
/// definition name collides with a native class.
VirtualMetamodel extend_metamodel(const Metamodel& mm,
                                  const std::vector<VirtualWidgetDef>& defs);

} // namespace virtree

#include "virtree/metamodel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "virtree/defs.hpp"

namespace virtree {

namespace {

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

ClassProperty parse_property_decl(const std::string& decl, int line_no) {
    auto colon = decl.find(':');
    if (colon == std::string::npos || colon == 0)
        throw Error("metamodel line " + std::to_string(line_no) +
                    ": property declaration '" + decl + "' must be name:type");
    ClassProperty prop;
    prop.name = trim(decl.substr(0, colon));
    std::string type = trim(decl.substr(colon + 1));
    if (type == "text") {
        prop.type = PropertyType::Text;
    } else if (type == "expression") {
        prop.type = PropertyType::Expression;
    } else if (type == "bool") {
        prop.type = PropertyType::BoolLiteral;
    } else if (type.rfind("enum(", 0) == 0 && type.back() == ')') {
        prop.type = PropertyType::Enum;
        for (const std::string& v : split(type.substr(5, type.size() - 6), '|')) {
            std::string value = trim(v);
            if (value.empty())
                throw Error("metamodel line " + std::to_string(line_no) +
                            ": empty enum value in '" + decl + "'");
            prop.enum_values.push_back(std::move(value));
        }
        if (prop.enum_values.empty())
            throw Error("metamodel line " + std::to_string(line_no) +
                        ": enum type needs at least one value");
    } else {
        throw Error("metamodel line " + std::to_string(line_no) + ": unknown property type '" +
                    type + "'");
    }
    return prop;
}

} // namespace

bool ClassProperty::allows_value(std::string_view value) const {
    switch (type) {
        case PropertyType::BoolLiteral:
            return value == "true" || value == "false";
        case PropertyType::Enum:
            return std::find(enum_values.begin(), enum_values.end(), value) != enum_values.end();
        default:
            return true;
    }
}

const ClassProperty* WidgetClass::find_property(std::string_view name) const {
    for (const ClassProperty& p : properties)
        if (p.name == name) return &p;
    return nullptr;
}

void Metamodel::add_class(WidgetClass cls) {
    if (find_class(cls.name)) throw Error("duplicate class '" + cls.name + "'");
    if (cls.name == "Widget") throw Error("'Widget' is the implicit base class name");
    classes_.push_back(std::move(cls));
}

const WidgetClass* Metamodel::find_class(std::string_view name) const {
    for (const WidgetClass& c : classes_)
        if (c.name == name) return &c;
    return nullptr;
}

const VirtualClass* VirtualMetamodel::find_virtual(std::string_view name) const {
    for (const VirtualClass& c : virtual_classes)
        if (c.name == name) return &c;
    return nullptr;
}

Metamodel load_metamodel(std::string_view text) {
    Metamodel mm;
    std::vector<std::pair<std::string, int>> constraints_to_check;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        std::istringstream words(line);
        std::string kw;
        words >> kw;
        if (kw != "class")
            throw Error("metamodel line " + std::to_string(line_no) + ": expected 'class ...'");

        WidgetClass cls;
        if (!(words >> cls.name))
            throw Error("metamodel line " + std::to_string(line_no) + ": missing class name");

        std::string tok;
        bool kind_seen = false;
        while (words >> tok) {
            if (tok == "leaf") {
                kind_seen = true;
            } else if (tok == "container") {
                std::string of, child;
                if (!(words >> of >> child) || of != "of")
                    throw Error("metamodel line " + std::to_string(line_no) +
                                ": expected 'container of <Class>'");
                cls.is_container = true;
                cls.child_constraint = child;
                constraints_to_check.emplace_back(child, line_no);
                kind_seen = true;
            } else if (tok == "root") {
                cls.is_root = true;
            } else if (tok == "props") {
                std::string rest;
                std::getline(words, rest);
                for (const std::string& decl : split(trim(rest), ','))
                    cls.properties.push_back(parse_property_decl(trim(decl), line_no));
            } else {
                throw Error("metamodel line " + std::to_string(line_no) + ": unexpected token '" +
                            tok + "'");
            }
        }
        if (!kind_seen)
            throw Error("metamodel line " + std::to_string(line_no) + ": class '" + cls.name +
                        "' must be 'leaf' or 'container of <Class>'");
        for (size_t i = 0; i < cls.properties.size(); ++i)
            for (size_t j = i + 1; j < cls.properties.size(); ++j)
                if (cls.properties[i].name == cls.properties[j].name)
                    throw Error("metamodel line " + std::to_string(line_no) +
                                ": duplicate property '" + cls.properties[i].name + "'");

        if (cls.is_root) {
            if (!mm.root_class().empty())
                throw Error("metamodel line " + std::to_string(line_no) +
                            ": more than one root class ('" + mm.root_class() + "' and '" +
                            cls.name + "')");
            mm.set_root_class(cls.name);
        }
        mm.add_class(std::move(cls));
    }

    for (const auto& [child, at_line] : constraints_to_check)
        if (child != "Widget" && !mm.find_class(child))
            throw Error("metamodel line " + std::to_string(at_line) +
                        ": child constraint references unknown class '" + child + "'");
    if (mm.root_class().empty()) throw Error("metamodel declares no root class");
    if (!mm.find_class(mm.root_class())->is_container)
        throw Error("root class '" + mm.root_class() + "' must be a container");
    return mm;
}

Metamodel load_metamodel_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open metamodel file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_metamodel(buf.str());
}

namespace {

void validate_widget(const Widget& w, const Metamodel& mm, std::vector<Diagnostic>& out) {
    const WidgetClass* cls = mm.find_class(w.class_name);
    if (!cls) {
        out.push_back({"unknown widget class '" + w.class_name + "'", w.id});
        return;
    }
    if (!cls->is_container && !w.children.empty())
        out.push_back({"'" + w.class_name + "' is a leaf class but has children", w.id});
    if (cls->is_container && cls->child_constraint != "Widget") {
        for (const Widget& child : w.children)
            if (child.class_name != cls->child_constraint)
                out.push_back({"'" + w.class_name + "' may only contain '" +
                                   cls->child_constraint + "', found '" + child.class_name + "'",
                               child.id});
    }
    for (const auto& [name, value] : w.properties) {
        const ClassProperty* prop = cls->find_property(name);
        if (prop && !prop->allows_value(value))
            out.push_back({"property '" + name + "' of '" + w.class_name +
                               "' does not allow value \"" + value + "\"",
                           w.id});
    }
    for (const Widget& child : w.children) validate_widget(child, mm, out);
}

} // namespace

std::vector<Diagnostic> validate_model(const Model& model, const Metamodel& mm) {
    std::vector<Diagnostic> out;
    if (model.root.class_name != mm.root_class())
        out.push_back({"root widget class '" + model.root.class_name + "' is not the root class '" +
                           mm.root_class() + "'",
                       model.root.id});
    validate_widget(model.root, mm, out);
    return out;
}

VirtualMetamodel extend_metamodel(const Metamodel& mm,
                                  const std::vector<VirtualWidgetDef>& defs) {
    VirtualMetamodel vmm;
    for (const WidgetClass& cls : mm.classes()) {
        WidgetClass relaxed = cls;
        if (relaxed.is_container) relaxed.child_constraint = "Widget";
        vmm.base.add_class(std::move(relaxed));
    }
    vmm.base.set_root_class(mm.root_class());

    for (const VirtualWidgetDef& def : defs) {
        if (mm.find_class(def.name))
            throw Error("virtual widget '" + def.name + "' collides with a native class");
        if (vmm.find_virtual(def.name))
            throw Error("duplicate virtual widget '" + def.name + "'");
        VirtualClass vc;
        vc.name = def.name;
        for (const PropertyDecl& p : def.properties) vc.properties.push_back(p.name);
        vc.properties.push_back("Pattern");
        vmm.virtual_classes.push_back(std::move(vc));
    }
    return vmm;
}

} // namespace virtree

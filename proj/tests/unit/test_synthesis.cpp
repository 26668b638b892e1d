#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "virtree/parser.hpp"
#include "virtree/synthesis.hpp"

using namespace virtree;

namespace {

const VirtualWidgetDef& def_named(const std::string& name) {
    const VirtualWidgetDef* def = find_def(vt_test::fixture_defs(), name);
    REQUIRE(def != nullptr);
    return *def;
}

const ParserTables& tables() {
    static ParserTables t = [] {
        VirtualMetamodel vmm =
            extend_metamodel(vt_test::fixture_metamodel(), vt_test::fixture_defs());
        return build_tables(generate_grammar(vmm, vt_test::fixture_defs()));
    }();
    return t;
}

Model wrap_in_form(std::vector<Widget> widgets) {
    Model m;
    m.root.class_name = "Form";
    m.root.id = "f0";
    m.root.children = std::move(widgets);
    return m;
}

} // namespace

TEST_CASE("instantiate: BooleanInput pattern #3") {
    IdAllocator ids;
    Instantiation inst =
        instantiate(def_named("BooleanInput"), 3, {{"Variable", "Request.Approved"}}, ids);
    REQUIRE(inst.widgets.size() == 2);

    const Widget& label = inst.widgets[0];
    CHECK(label.class_name == "Label");
    REQUIRE(label.children.size() == 1);
    CHECK(label.children[0].properties.get_or("Value") == "Approved");  // GetLabelFor default

    const Widget& group = inst.widgets[1];
    CHECK(group.class_name == "ButtonGroup");
    CHECK(group.properties.get_or("Variable") == "Request.Approved");
    REQUIRE(group.children.size() == 2);
    CHECK(group.children[0].properties.get_or("Value") == "true");
    CHECK(group.children[0].children[0].properties.get_or("Value") == "Yes");
    CHECK(group.children[1].properties.get_or("Value") == "false");
    CHECK(group.children[1].children[0].properties.get_or("Value") == "No");

    CHECK(inst.captures.at("t") == "t1");
    CHECK(inst.captures.at("i") == "i1");
    CHECK(validate_model(wrap_in_form(inst.widgets), vt_test::fixture_metamodel()).empty());
}

TEST_CASE("instantiate: BooleanInput pattern #1 with explicit label") {
    IdAllocator ids;
    Instantiation inst = instantiate(def_named("BooleanInput"), 1,
                                     {{"Variable", "V"}, {"Label", "L"}}, ids);
    REQUIRE(inst.widgets.size() == 2);
    CHECK(inst.widgets[0].class_name == "Label");
    CHECK(inst.widgets[0].children[0].properties.get_or("Value") == "L");
    CHECK(inst.widgets[1].class_name == "Checkbox");
    CHECK(inst.widgets[1].properties.get_or("Variable") == "V");
}

TEST_CASE("instantiate: errors") {
    IdAllocator ids;
    CHECK_THROWS_WITH_AS(instantiate(def_named("BooleanInput"), 1, {}, ids),
                         doctest::Contains("required property 'Variable'"), Error);
    CHECK_THROWS_WITH_AS(instantiate(def_named("BooleanInput"), 9, {{"Variable", "V"}}, ids),
                         doctest::Contains("no pattern #9"), Error);
    CHECK_THROWS_AS(
        instantiate(def_named("BooleanInput"), 1, {{"Variable", "V"}, {"Junk", "x"}}, ids),
        Error);
}

TEST_CASE("instantiate: repeated groups emit the items spelled out in the pattern") {
    IdAllocator ids;
    Instantiation inst = instantiate(def_named("EnumInput"), 1, {{"Variable", "V"}}, ids);
    REQUIRE(inst.widgets.size() == 2);
    const Widget& group = inst.widgets[1];
    REQUIRE(group.children.size() == 1);  // one sample item in the pattern
    CHECK(group.children[0].class_name == "ButtonGroupItem");
    CHECK(validate_model(wrap_in_form(inst.widgets), vt_test::fixture_metamodel()).empty());
}

TEST_CASE("switch_pattern: fixture v2 from pattern #3 to #1 keeps the text style") {
    ParseResult result = parse_model(vt_test::fixture_model(), tables(),
                                     vt_test::fixture_defs(), vt_test::fixture_metamodel());
    VNode* node = find_vnode(result.model, "v2");
    REQUIRE(node != nullptr);
    VirtualNode& v2 = *node->as_virtual();

    IdAllocator ids;
    for (const Widget& w : v2.provenance) ids.seed_from(w);
    switch_pattern(v2, def_named("BooleanInput"), 1, ids);

    CHECK(v2.pattern_index == 1);
    CHECK_FALSE(v2.dirty);
    REQUIRE(v2.provenance.size() == 2);
    const Widget& label = v2.provenance[0];
    const Widget& checkbox = v2.provenance[1];
    CHECK(label.class_name == "Label");
    CHECK(checkbox.class_name == "Checkbox");

    // the shared node id t keeps the original widget: id, Style, Value
    REQUIRE(label.children.size() == 1);
    const Widget& text = label.children[0];
    CHECK(text.id == "t3");
    CHECK(text.properties.get_or("Style") == "Bold");
    CHECK(text.properties.get_or("Value") == "Approved");

    // i maps onto the checkbox; the equation sets its Variable
    CHECK(checkbox.id == "bg");
    CHECK(checkbox.properties.get_or("Variable") == "Request.Approved");
    CHECK(v2.captures.at("t") == "t3");
    CHECK(v2.captures.at("i") == "bg");

    // the ButtonGroup internals are gone
    for (const Widget& w : v2.provenance)
        for_each_widget(w, [&](const Widget& inner) {
            CHECK(inner.class_name != "ButtonGroup");
            CHECK(inner.class_name != "ButtonGroupItem");
        });
}

TEST_CASE("switch_pattern: same-pattern switch renders identically") {
    ParseResult result = parse_model(vt_test::fixture_model(), tables(),
                                     vt_test::fixture_defs(), vt_test::fixture_metamodel());
    std::string before = save_model(render_native(result.model, vt_test::fixture_defs()));

    VirtualNode& v2 = *find_vnode(result.model, "v2")->as_virtual();
    IdAllocator ids;
    switch_pattern(v2, def_named("BooleanInput"), 3, ids);
    std::string after = save_model(render_native(result.model, vt_test::fixture_defs()));
    CHECK(after == before);
}

TEST_CASE("switch_pattern: checkbox to switch carries state through both routes") {
    Model m = load_model(R"(<Form>
  <Label Id="l"><Text Id="t" Value="Done" Style="Italic"/></Label>
  <Checkbox Id="cb" Variable="Request.Done"/>
</Form>)");
    ParseResult result =
        parse_model(m, tables(), vt_test::fixture_defs(), vt_test::fixture_metamodel());
    VirtualNode& node = *find_vnode(result.model, "v1")->as_virtual();
    REQUIRE(node.pattern_index == 1);

    auto props_before = node.properties;
    IdAllocator ids(m);
    switch_pattern(node, def_named("BooleanInput"), 2, ids);

    CHECK(node.properties == props_before);  // switching preserves properties
    REQUIRE(node.provenance.size() == 2);
    const Widget& sw = node.provenance[1];
    CHECK(sw.class_name == "Switch");
    CHECK(sw.id == "cb");  // shared node id i keeps the widget identity
    CHECK(sw.properties.get_or("Variable") == "Request.Done");
    CHECK(node.provenance[0].children[0].properties.get_or("Style") == "Italic");
}

TEST_CASE("switch_pattern: invalid index") {
    ParseResult result = parse_model(vt_test::fixture_model(), tables(),
                                     vt_test::fixture_defs(), vt_test::fixture_metamodel());
    VirtualNode& v2 = *find_vnode(result.model, "v2")->as_virtual();
    IdAllocator ids;
    CHECK_THROWS_AS(switch_pattern(v2, def_named("BooleanInput"), 7, ids), Error);
}

TEST_CASE("set_virtual_property pushes through the equations in place") {
    ParseResult result = parse_model(vt_test::fixture_model(), tables(),
                                     vt_test::fixture_defs(), vt_test::fixture_metamodel());
    VirtualNode& v2 = *find_vnode(result.model, "v2")->as_virtual();

    set_virtual_property(v2, def_named("BooleanInput"), "Label", "Done?");
    CHECK_FALSE(v2.dirty);  // provenance stays consistent
    const Widget* t3 = nullptr;
    for (const Widget& w : v2.provenance)
        for_each_widget(w, [&](const Widget& inner) {
            if (inner.id == "t3") t3 = &inner;
        });
    REQUIRE(t3 != nullptr);
    CHECK(t3->properties.get_or("Value") == "Done?");

    set_virtual_property(v2, def_named("BooleanInput"), "Variable", "Request.Other");
    const Widget* bg = nullptr;
    for (const Widget& w : v2.provenance)
        for_each_widget(w, [&](const Widget& inner) {
            if (inner.id == "bg") bg = &inner;
        });
    REQUIRE(bg != nullptr);
    CHECK(bg->properties.get_or("Variable") == "Request.Other");

    CHECK_THROWS_AS(set_virtual_property(v2, def_named("BooleanInput"), "Junk", "x"), Error);

    VirtualNode fresh;
    fresh.def_name = "BooleanInput";
    fresh.pattern_index = 1;
    set_virtual_property(fresh, def_named("BooleanInput"), "Variable", "V");
    CHECK(fresh.dirty);  // nothing to keep consistent yet
}

TEST_CASE("property: instantiation is always metamodel-valid") {
    std::mt19937_64 rng(7);
    const auto& defs = vt_test::fixture_defs();
    for (int i = 0; i < 200; ++i) {
        const VirtualWidgetDef& def = defs[rng() % defs.size()];
        int pattern = 1 + static_cast<int>(rng() % def.patterns.size());
        std::map<std::string, std::string> props;
        for (const PropertyDecl& decl : def.properties) {
            if (!decl.is_required() && rng() % 2 == 0) continue;
            props[decl.name] = "Value" + std::to_string(rng() % 1000);
        }
        IdAllocator ids;
        Instantiation inst = instantiate(def, pattern, props, ids);
        CHECK(validate_model(wrap_in_form(inst.widgets), vt_test::fixture_metamodel()).empty());
    }
}

TEST_CASE("property: synthesized instances re-virtualize to the same definition") {
    std::mt19937_64 rng(11);
    const auto& defs = vt_test::fixture_defs();
    for (const VirtualWidgetDef& def : defs) {
        for (const Pattern& pattern : def.patterns) {
            std::map<std::string, std::string> props;
            props["Variable"] = "Data.Field" + std::to_string(rng() % 100);
            if (rng() % 2 == 0) props["Label"] = "Label " + std::to_string(rng() % 100);

            IdAllocator ids;
            Instantiation inst = instantiate(def, pattern.index, props, ids);

            // embed between plain native widgets
            Model m;
            m.root.class_name = "Form";
            m.root.id = "f0";
            Widget container;
            container.class_name = "Container";
            container.id = "c0";
            Widget noise;
            noise.class_name = "Text";
            noise.id = "n0";
            noise.properties.set("Value", "before");
            container.children.push_back(noise);
            for (Widget& w : inst.widgets) container.children.push_back(std::move(w));
            Widget noise2 = container.children[0];
            noise2.id = "n1";
            container.children.push_back(noise2);
            m.root.children.push_back(std::move(container));

            ParseResult result =
                parse_model(m, tables(), vt_test::fixture_defs(), vt_test::fixture_metamodel());
            const NativeVNode* parsed_container =
                result.model.root.as_native()->children[0].as_native();
            REQUIRE(parsed_container != nullptr);
            const VirtualNode* recovered = nullptr;
            for (const VNode& child : parsed_container->children)
                if (child.is_virtual()) recovered = child.as_virtual();
            REQUIRE(recovered != nullptr);
            CHECK(recovered->def_name == def.name);
            CHECK(recovered->pattern_index == pattern.index);
            const std::map<std::string, std::string> resolved =
                resolve_properties(def, props);
            CHECK(recovered->properties == resolved);
        }
    }
}

#include <doctest.h>

#include <thread>

#include "fixtures.hpp"
#include "virtree/parser.hpp"

using namespace virtree;

namespace {

const ParserTables& fixture_tables() {
    static ParserTables tables = [] {
        VirtualMetamodel vmm =
            extend_metamodel(vt_test::fixture_metamodel(), vt_test::fixture_defs());
        return build_tables(generate_grammar(vmm, vt_test::fixture_defs()));
    }();
    return tables;
}

// Follows shift transitions over a token sequence; decision tables are
// resolved against each token's properties.
int walk_shifts(const ParserTables& tables, const std::vector<Token>& tokens) {
    int state = tables.initial_state();
    for (const Token& tok : tokens) {
        const ActionEntry* entry =
            tables.action(state, tables.token_key(tok.kind, tok.class_name));
        REQUIRE(entry != nullptr);
        REQUIRE(entry->shift.has_value());
        const DecisionTable& dt = *entry->shift;
        if (dt.property.empty()) {
            state = dt.other_state;
        } else {
            const std::string* value = tok.properties.find(dt.property);
            auto hit = value ? dt.value_to_state.find(*value) : dt.value_to_state.end();
            state = hit != dt.value_to_state.end() ? hit->second : dt.other_state;
        }
        REQUIRE(state >= 0);
    }
    return state;
}

Token make_token(TokKind kind, std::string cls, std::string id = {},
                 std::vector<std::pair<std::string, std::string>> props = {}) {
    Token t;
    t.kind = kind;
    t.class_name = std::move(cls);
    t.widget_id = std::move(id);
    for (auto& [k, v] : props) t.properties.set(k, v);
    return t;
}

ParseResult parse_xml(const std::string& xml) {
    Model m = load_model(xml);
    return parse_model(m, fixture_tables(), vt_test::fixture_defs(),
                       vt_test::fixture_metamodel());
}

} // namespace

TEST_CASE("tokenize: emission rule") {
    const Metamodel& mm = vt_test::fixture_metamodel();

    Model small = load_model(R"(<Form><Checkbox Id="c"/></Form>)");
    auto tokens = tokenize(small, mm);
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0].kind == TokKind::Open);
    CHECK(tokens[0].class_name == "Form");
    CHECK(tokens[1].kind == TokKind::Leaf);
    CHECK(tokens[1].class_name == "Checkbox");
    CHECK(tokens[1].widget_id == "c");
    CHECK(tokens[2].kind == TokKind::Close);

    Model empty = load_model("<Form/>");
    CHECK(tokenize(empty, mm).size() == 2);

    for (size_t i = 0; i < tokens.size(); ++i) CHECK(tokens[i].position == (int)i);
}

TEST_CASE("tokenize: second input of the request form") {
    // Label/Text plus a two-item ButtonGroup: 3 + 8 tokens by the rule
    Model m = vt_test::fixture_model();
    Model sub;
    sub.root = *find_widget(m, "l2");
    const Metamodel& mm = vt_test::fixture_metamodel();
    auto label_tokens = tokenize(sub, mm);
    Model bg;
    bg.root = *find_widget(m, "bg");
    auto group_tokens = tokenize(bg, mm);
    CHECK(label_tokens.size() + group_tokens.size() == 11);
}

TEST_CASE("build_tables: decision table after label/text/buttongroup") {
    const ParserTables& tables = fixture_tables();
    // inside the root context, after [open Label, leaf Text, close Label,
    // open ButtonGroup]
    int state = walk_shifts(tables, {
                                        make_token(TokKind::Open, "Form"),
                                        make_token(TokKind::Open, "Label"),
                                        make_token(TokKind::Leaf, "Text"),
                                        make_token(TokKind::Close, "Label"),
                                        make_token(TokKind::Open, "ButtonGroup"),
                                    });

    const ActionEntry* item_entry =
        tables.action(state, tables.token_key(TokKind::Open, "ButtonGroupItem"));
    REQUIRE(item_entry != nullptr);
    REQUIRE(item_entry->shift.has_value());
    const DecisionTable& dt = *item_entry->shift;
    CHECK(dt.property == "Value");
    REQUIRE(dt.value_to_state.count("true") == 1);
    REQUIRE(dt.other_state >= 0);
    CHECK(dt.value_to_state.at("true") != dt.other_state);

    const ActionEntry* close_entry =
        tables.action(state, tables.token_key(TokKind::Close, "ButtonGroup"));
    REQUIRE(close_entry != nullptr);
    REQUIRE_FALSE(close_entry->reduces.empty());
    const Rule& first = tables.grammar().rules[close_entry->reduces.front()];
    CHECK(first.provenance.kind == RuleProvenance::Kind::Pattern);
    CHECK(first.display_name() == "EnumInput.1");
}

TEST_CASE("build_tables: conflicts are recorded, not resolved away") {
    const ConflictReport& report = fixture_tables().conflicts();
    CHECK(report.shift_reduce > 0);
    // no state of this grammar completes two rules at once; reduce-reduce
    // conflicts appear only with larger overlapping pattern sets
    CHECK(report.reduce_reduce == 0);
}

TEST_CASE("build_tables: overlapping same-shape patterns give reduce-reduce conflicts") {
    Metamodel mm = load_metamodel(
        "class Root container of Widget root\n"
        "class Thing leaf props Variable:expression\n");
    auto make_def = [](std::string name, int rank) {
        VirtualWidgetDef def;
        def.name = std::move(name);
        def.priority_rank = rank;
        Pattern p;
        p.index = 1;
        PatternNode node;
        node.class_name = "Thing";
        node.id = "i";
        p.root_sequence.push_back(node);
        p.bindings.push_back({"Variable", "i", "Variable"});
        def.properties.push_back({"Variable", PropertyDecl::Type::Expression, {}});
        def.patterns.push_back(std::move(p));
        return def;
    };
    std::vector<VirtualWidgetDef> defs{make_def("A", 0), make_def("B", 1)};
    ParserTables tables = build_tables(generate_grammar(extend_metamodel(mm, defs), defs));
    CHECK(tables.conflicts().reduce_reduce > 0);

    // the higher-priority definition wins the reduce
    Model m = load_model(R"(<Root><Thing Variable="X"/></Root>)");
    ParseResult result = parse_model(m, tables, defs, mm);
    const VirtualNode* v = result.model.root.as_native()->children[0].as_virtual();
    REQUIRE(v != nullptr);
    CHECK(v->def_name == "A");
}

TEST_CASE("build_tables: multi-property split is rejected") {
    Metamodel mm = load_metamodel(
        "class Root container of Widget root\n"
        "class Thing leaf props A:bool,B:bool\n");
    VirtualWidgetDef x;
    x.name = "X";
    Pattern px;
    px.index = 1;
    PatternNode nx;
    nx.class_name = "Thing";
    nx.match_properties.set("A", "true");
    px.root_sequence.push_back(nx);
    x.patterns.push_back(px);

    VirtualWidgetDef y = x;
    y.name = "Y";
    y.patterns[0].root_sequence[0].match_properties = {};
    y.patterns[0].root_sequence[0].match_properties.set("B", "true");
    y.priority_rank = 1;

    std::vector<VirtualWidgetDef> defs{x, y};
    VirtualMetamodel vmm = extend_metamodel(mm, defs);
    CHECK_THROWS_WITH_AS(build_tables(generate_grammar(vmm, defs)),
                         doctest::Contains("multi-property split"), Error);
}

TEST_CASE("parse: request form fixture") {
    Model m = vt_test::fixture_model();
    ParseResult result =
        parse_model(m, fixture_tables(), vt_test::fixture_defs(), vt_test::fixture_metamodel());

    const NativeVNode* form = result.model.root.as_native();
    REQUIRE(form != nullptr);
    CHECK(form->class_name == "Form");
    REQUIRE(form->children.size() == 1);
    const NativeVNode* container = form->children[0].as_native();
    REQUIRE(container != nullptr);
    REQUIRE(container->children.size() == 2);

    const VirtualNode* text_input = container->children[0].as_virtual();
    REQUIRE(text_input != nullptr);
    CHECK(text_input->def_name == "TextInput");
    CHECK(text_input->pattern_index == 1);
    CHECK(text_input->id == "v1");
    CHECK(text_input->properties.at("Variable") == "Request.Description");
    CHECK(text_input->properties.at("Label") == "Request description");

    const VirtualNode* boolean = container->children[1].as_virtual();
    REQUIRE(boolean != nullptr);
    CHECK(boolean->def_name == "BooleanInput");
    CHECK(boolean->pattern_index == 3);
    CHECK(boolean->id == "v2");
    CHECK(boolean->captures.at("t") == "t3");
    CHECK(boolean->captures.at("i") == "bg");
    CHECK(boolean->properties.at("Variable") == "Request.Approved");
    CHECK(boolean->properties.at("Label") == "Approved");
    REQUIRE(boolean->provenance.size() == 2);
    CHECK(boolean->provenance[0].class_name == "Label");
    CHECK(boolean->provenance[1].class_name == "ButtonGroup");

    CHECK(result.stats.input_tokens == 19);
    CHECK(result.stats.shifts == 19);
    CHECK(result.stats.conflicts == 3);
    CHECK(result.stats.backtrack_ops == 0);
}

TEST_CASE("parse: two-item group stays BooleanInput, three items fall to EnumInput") {
    ParseResult two = parse_xml(R"(<Form>
  <Label><Text Value="Approved"/></Label>
  <ButtonGroup Variable="V">
    <ButtonGroupItem Value="true"><Text Value="Yes"/></ButtonGroupItem>
    <ButtonGroupItem Value="false"><Text Value="No"/></ButtonGroupItem>
  </ButtonGroup>
</Form>)");
    const NativeVNode* form = two.model.root.as_native();
    REQUIRE(form->children.size() == 1);
    const VirtualNode* v = form->children[0].as_virtual();
    REQUIRE(v != nullptr);
    CHECK(v->def_name == "BooleanInput");
    CHECK(v->pattern_index == 3);
    CHECK(two.stats.backtrack_ops == 0);

    ParseResult three = parse_xml(R"(<Form>
  <Label><Text Value="Choice"/></Label>
  <ButtonGroup Variable="V">
    <ButtonGroupItem Value="true"><Text Value="A"/></ButtonGroupItem>
    <ButtonGroupItem Value="false"><Text Value="B"/></ButtonGroupItem>
    <ButtonGroupItem Value="true"><Text Value="C"/></ButtonGroupItem>
  </ButtonGroup>
</Form>)");
    const VirtualNode* e = three.model.root.as_native()->children[0].as_virtual();
    REQUIRE(e != nullptr);
    CHECK(e->def_name == "EnumInput");
    CHECK(e->pattern_index == 1);
    CHECK(three.stats.backtrack_ops >= 1);
    CHECK(three.stats.backtracked_tokens >= three.stats.backtrack_ops);
    CHECK(three.stats.avg_backtracked_tokens() >= 1.0);
}

TEST_CASE("parse: models without pattern occurrences stay native") {
    ParseResult result = parse_xml(
        R"(<Form><Container><Text Value="a"/><Container><Text Value="b"/></Container></Container></Form>)");
    int virtuals = count_virtual_nodes(result.model);
    CHECK(virtuals == 0);
    const NativeVNode* form = result.model.root.as_native();
    REQUIRE(form != nullptr);
    const NativeVNode* container = form->children[0].as_native();
    REQUIRE(container != nullptr);
    CHECK(container->children.size() == 2);
    CHECK(container->children[0].as_native()->properties.get_or("Value") == "a");
}

TEST_CASE("parse: dangling label forces a backtrack into the native reading") {
    ParseResult result = parse_xml(
        R"(<Form><Label><Text Value="lonely"/></Label><Text Value="follower"/></Form>)");
    CHECK(count_virtual_nodes(result.model) == 0);
    CHECK(result.stats.backtrack_ops >= 1);
    CHECK(result.stats.shifts > result.stats.input_tokens);  // rescanned tokens
}

TEST_CASE("parse: empty button group after a label reads as EnumInput") {
    ParseResult result = parse_xml(
        R"(<Form><Label><Text Value="Choice"/></Label><ButtonGroup Variable="V"/></Form>)");
    const VirtualNode* v = result.model.root.as_native()->children[0].as_virtual();
    REQUIRE(v != nullptr);
    CHECK(v->def_name == "EnumInput");
}

TEST_CASE("parse: model rooted at the wrong class reports the expected root") {
    Model m = load_model(R"(<Container><Text/></Container>)");
    auto tokens = tokenize(m, vt_test::fixture_metamodel());
    CHECK_THROWS_WITH_AS(parse(tokens, fixture_tables(), vt_test::fixture_defs()),
                         doctest::Contains("the tables parse 'Form' trees"), Error);
}

TEST_CASE("parse: unknown token class is a hard error") {
    Metamodel extended = load_metamodel(
        "class Form container of Widget root\n"
        "class Mystery leaf\n");
    Model m = load_model("<Form><Mystery/></Form>");
    auto tokens = tokenize(m, extended);
    CHECK_THROWS_WITH_AS(parse(tokens, fixture_tables(), vt_test::fixture_defs()),
                         doctest::Contains("unknown to the parser tables"), Error);
}

TEST_CASE("parse_subtree") {
    Model m = vt_test::fixture_model();
    VirtualMetamodel vmm =
        extend_metamodel(vt_test::fixture_metamodel(), vt_test::fixture_defs());
    ParserTables container_tables =
        build_tables(generate_grammar(vmm, vt_test::fixture_defs(), "Container"));

    ParseResult sub = parse_subtree(m, "c", container_tables, vt_test::fixture_defs(),
                                    vt_test::fixture_metamodel());
    const NativeVNode* container = sub.model.root.as_native();
    REQUIRE(container != nullptr);
    CHECK(container->class_name == "Container");
    REQUIRE(container->children.size() == 2);
    CHECK(container->children[0].as_virtual()->def_name == "TextInput");
    CHECK(container->children[1].as_virtual()->def_name == "BooleanInput");

    // same virtual children as the full parse
    ParseResult full =
        parse_model(m, fixture_tables(), vt_test::fixture_defs(), vt_test::fixture_metamodel());
    const NativeVNode* full_container =
        full.model.root.as_native()->children[0].as_native();
    CHECK(full_container->children[0].as_virtual()->properties ==
          container->children[0].as_virtual()->properties);
    CHECK(full_container->children[1].as_virtual()->captures ==
          container->children[1].as_virtual()->captures);

    // subtree parse at the root equals the full parse
    ParseResult at_root = parse_subtree(m, m.root.id, fixture_tables(),
                                        vt_test::fixture_defs(), vt_test::fixture_metamodel());
    CHECK(save_virtual(at_root.model) == save_virtual(full.model));

    CHECK_THROWS(parse_subtree(m, "zzz", container_tables, vt_test::fixture_defs(),
                               vt_test::fixture_metamodel()));
    CHECK_THROWS(parse_subtree(m, "bg", container_tables, vt_test::fixture_defs(),
                               vt_test::fixture_metamodel()));
}

TEST_CASE("parse: sessions on distinct models share tables across threads") {
    Model a = load_model(R"(<Form><Label><Text Value="x"/></Label><Checkbox Variable="V"/></Form>)");
    Model b = vt_test::fixture_model();
    std::string out_a, out_b;
    std::thread ta([&] {
        out_a = save_virtual(parse_model(a, fixture_tables(), vt_test::fixture_defs(),
                                         vt_test::fixture_metamodel())
                                 .model);
    });
    std::thread tb([&] {
        out_b = save_virtual(parse_model(b, fixture_tables(), vt_test::fixture_defs(),
                                         vt_test::fixture_metamodel())
                                 .model);
    });
    ta.join();
    tb.join();
    CHECK(out_a == save_virtual(parse_model(a, fixture_tables(), vt_test::fixture_defs(),
                                            vt_test::fixture_metamodel())
                                    .model));
    CHECK(out_b == save_virtual(parse_model(b, fixture_tables(), vt_test::fixture_defs(),
                                            vt_test::fixture_metamodel())
                                    .model));
}

TEST_CASE("format_stats emits the nine-line block") {
    ParseStats stats;
    stats.input_tokens = 100;
    stats.shifts = 104;
    stats.conflicts = 8;
    stats.backtrack_ops = 3;
    stats.backtracked_tokens = 4;
    std::string block = format_stats(stats);
    CHECK(block.find("Total input token count 100\n") != std::string::npos);
    CHECK(block.find("Shift operations count 104\n") != std::string::npos);
    CHECK(block.find("Total conflict count 8\n") != std::string::npos);
    CHECK(block.find("Backtracking operations count 3\n") != std::string::npos);
    CHECK(block.find("Total backtracked tokens 4\n") != std::string::npos);
    CHECK(block.find("Average shift operations per input token 1.040\n") != std::string::npos);
    CHECK(block.find("Conflict rate per input token 8.00%\n") != std::string::npos);
    CHECK(block.find("Backtracking rate per input token 3.00%\n") != std::string::npos);
    CHECK(block.find("Average backtracked tokens per backtracking operation 1.333\n") !=
          std::string::npos);
    CHECK(std::count(block.begin(), block.end(), '\n') == 9);
}

#include "virtree/parser.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <iomanip>
#include <memory>
#include <sstream>

#include "virtree/synthesis.hpp"

namespace virtree {

// ---------------------------------------------------------------------------
// tokenize

namespace {

void emit_tokens(const Widget& w, const Metamodel& mm, std::vector<Token>& out) {
    const WidgetClass* cls = mm.find_class(w.class_name);
    if (!cls) throw Error("cannot tokenize unknown class '" + w.class_name + "'");
    if (!cls->is_container) {
        Token t;
        t.kind = TokKind::Leaf;
        t.class_name = w.class_name;
        t.properties = w.properties;
        t.widget_id = w.id;
        out.push_back(std::move(t));
        return;
    }
    Token open;
    open.kind = TokKind::Open;
    open.class_name = w.class_name;
    open.properties = w.properties;
    open.widget_id = w.id;
    out.push_back(std::move(open));
    for (const Widget& child : w.children) emit_tokens(child, mm, out);
    Token close;
    close.kind = TokKind::Close;
    close.class_name = w.class_name;
    close.widget_id = w.id;
    out.push_back(std::move(close));
}

} // namespace

std::vector<Token> tokenize(const Model& model, const Metamodel& mm) {
    std::vector<Token> out;
    emit_tokens(model.root, mm, out);
    for (size_t i = 0; i < out.size(); ++i) out[i].position = static_cast<int>(i);
    return out;
}

// ---------------------------------------------------------------------------
// stats

double ParseStats::avg_shifts_per_token() const {
    return input_tokens > 0 ? static_cast<double>(shifts) / input_tokens : 0.0;
}
double ParseStats::conflict_rate() const {
    return input_tokens > 0 ? static_cast<double>(conflicts) / input_tokens : 0.0;
}
double ParseStats::backtrack_rate() const {
    return input_tokens > 0 ? static_cast<double>(backtrack_ops) / input_tokens : 0.0;
}
double ParseStats::avg_backtracked_tokens() const {
    return backtrack_ops > 0 ? static_cast<double>(backtracked_tokens) / backtrack_ops : 0.0;
}

void ParseStats::add(const ParseStats& other) {
    input_tokens += other.input_tokens;
    shifts += other.shifts;
    conflicts += other.conflicts;
    backtrack_ops += other.backtrack_ops;
    backtracked_tokens += other.backtracked_tokens;
}

std::string format_stats(const ParseStats& s) {
    std::ostringstream out;
    out << "Total input token count " << s.input_tokens << "\n";
    out << "Shift operations count " << s.shifts << "\n";
    out << "Total conflict count " << s.conflicts << "\n";
    out << "Backtracking operations count " << s.backtrack_ops << "\n";
    out << "Total backtracked tokens " << s.backtracked_tokens << "\n";
    out << std::fixed << std::setprecision(3);
    out << "Average shift operations per input token " << s.avg_shifts_per_token() << "\n";
    out << std::setprecision(2);
    out << "Conflict rate per input token " << s.conflict_rate() * 100.0 << "%\n";
    out << "Backtracking rate per input token " << s.backtrack_rate() * 100.0 << "%\n";
    out << std::setprecision(3);
    out << "Average backtracked tokens per backtracking operation " << s.avg_backtracked_tokens()
        << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// table construction

namespace detail {

namespace {

struct BuilderSym {
    bool is_term = false;
    int key = -1;  // terminal token key
    int nt = -1;   // nonterminal id
    std::optional<Condition> cond;
};

using Item = std::pair<int, int>;  // (rule, dot), aug rule = rule count
using ItemSet = std::vector<Item>;

} // namespace

struct TablesBuilder {
    TablesBuilder(const Grammar& grammar, ParserTables& tables) : g(grammar), t(tables) {}

    const Grammar& g;
    ParserTables& t;

    int num_rules = 0;
    int aug_rule = 0;
    int start_nt = -1;
    std::vector<std::vector<BuilderSym>> rhs;
    std::vector<int> lhs;
    std::vector<std::vector<int>> rules_of_nt;

    std::vector<bool> nullable;
    std::vector<std::vector<bool>> first_sets;   // [nt][key]
    std::vector<std::vector<bool>> follow_sets;  // [nt][key]

    std::map<ItemSet, int> state_ids;
    std::vector<ItemSet> states;

    int intern_class(const std::string& name) {
        auto it = t.class_ids_.find(name);
        if (it != t.class_ids_.end()) return it->second;
        int id = static_cast<int>(t.class_names_.size());
        t.class_names_.push_back(name);
        t.class_ids_.emplace(name, id);
        return id;
    }

    int intern_nt(const std::string& name) {
        auto it = t.nt_ids_.find(name);
        if (it != t.nt_ids_.end()) return it->second;
        int id = static_cast<int>(t.nt_names_.size());
        t.nt_names_.push_back(name);
        t.nt_ids_.emplace(name, id);
        return id;
    }

    int term_key(TokKind kind, const std::string& cls) {
        return intern_class(cls) * 3 + static_cast<int>(kind);
    }

    void index_symbols() {
        num_rules = static_cast<int>(g.rules.size());
        aug_rule = num_rules;

        for (int i = 0; i < num_rules; ++i) {
            if (g.rules[i].priority != i)
                throw Error("grammar priorities must be the total order of the rule list");
            intern_nt(g.rules[i].lhs);
        }
        start_nt = intern_nt(g.start);

        rhs.resize(num_rules + 1);
        lhs.resize(num_rules + 1);
        for (int i = 0; i < num_rules; ++i) {
            lhs[i] = t.nt_ids_.at(g.rules[i].lhs);
            for (const GrammarSymbol& sym : g.rules[i].rhs) {
                BuilderSym b;
                if (sym.kind == GrammarSymbol::Kind::Terminal) {
                    b.is_term = true;
                    b.key = term_key(sym.terminal.kind, sym.terminal.class_name);
                    b.cond = sym.terminal.condition;
                } else {
                    auto it = t.nt_ids_.find(sym.nonterminal);
                    if (it == t.nt_ids_.end())
                        throw Error("nonterminal '" + sym.nonterminal + "' has no rules");
                    b.nt = it->second;
                }
                rhs[i].push_back(std::move(b));
            }
        }
        // augmented start rule
        lhs[aug_rule] = -1;
        BuilderSym s;
        s.nt = start_nt;
        rhs[aug_rule].push_back(s);

        t.eof_key_ = static_cast<int>(t.class_names_.size()) * 3;

        rules_of_nt.resize(t.nt_names_.size());
        for (int i = 0; i < num_rules; ++i) rules_of_nt[lhs[i]].push_back(i);
        for (size_t nt = 0; nt < rules_of_nt.size(); ++nt)
            if (rules_of_nt[nt].empty())
                throw Error("nonterminal '" + t.nt_names_[nt] + "' has no rules");
    }

    void compute_first_follow() {
        size_t nts = t.nt_names_.size();
        size_t keys = static_cast<size_t>(t.eof_key_) + 1;
        nullable.assign(nts, false);
        first_sets.assign(nts, std::vector<bool>(keys, false));
        follow_sets.assign(nts, std::vector<bool>(keys, false));

        bool changed = true;
        while (changed) {
            changed = false;
            for (int r = 0; r < num_rules; ++r) {
                int a = lhs[r];
                bool all_nullable = true;
                for (const BuilderSym& s : rhs[r]) {
                    if (s.is_term) {
                        if (!first_sets[a][s.key]) {
                            first_sets[a][s.key] = true;
                            changed = true;
                        }
                        all_nullable = false;
                        break;
                    }
                    for (size_t k = 0; k < keys; ++k)
                        if (first_sets[s.nt][k] && !first_sets[a][k]) {
                            first_sets[a][k] = true;
                            changed = true;
                        }
                    if (!nullable[s.nt]) {
                        all_nullable = false;
                        break;
                    }
                }
                if (all_nullable && !nullable[a]) {
                    nullable[a] = true;
                    changed = true;
                }
            }
        }

        follow_sets[start_nt][t.eof_key_] = true;
        changed = true;
        while (changed) {
            changed = false;
            for (int r = 0; r < num_rules; ++r) {
                int a = lhs[r];
                const auto& symbols = rhs[r];
                for (size_t i = 0; i < symbols.size(); ++i) {
                    if (symbols[i].is_term) continue;
                    int b = symbols[i].nt;
                    bool tail_nullable = true;
                    for (size_t j = i + 1; j < symbols.size(); ++j) {
                        const BuilderSym& s = symbols[j];
                        if (s.is_term) {
                            if (!follow_sets[b][s.key]) {
                                follow_sets[b][s.key] = true;
                                changed = true;
                            }
                            tail_nullable = false;
                            break;
                        }
                        for (size_t k = 0; k < follow_sets[b].size(); ++k)
                            if (first_sets[s.nt][k] && !follow_sets[b][k]) {
                                follow_sets[b][k] = true;
                                changed = true;
                            }
                        if (!nullable[s.nt]) {
                            tail_nullable = false;
                            break;
                        }
                    }
                    if (tail_nullable) {
                        for (size_t k = 0; k < follow_sets[b].size(); ++k)
                            if (follow_sets[a][k] && !follow_sets[b][k]) {
                                follow_sets[b][k] = true;
                                changed = true;
                            }
                    }
                }
            }
        }
    }

    void close(ItemSet& set) const {
        std::vector<bool> added(t.nt_names_.size(), false);
        for (size_t i = 0; i < set.size(); ++i) {
            auto [r, d] = set[i];
            const auto& symbols = rhs[r];
            if (d >= static_cast<int>(symbols.size()) || symbols[d].is_term) continue;
            int nt = symbols[d].nt;
            if (added[nt]) continue;
            added[nt] = true;
            for (int r2 : rules_of_nt[nt]) set.emplace_back(r2, 0);
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }

    int intern_state(ItemSet set) {
        close(set);
        auto it = state_ids.find(set);
        if (it != state_ids.end()) return it->second;
        int id = static_cast<int>(states.size());
        state_ids.emplace(set, id);
        states.push_back(std::move(set));
        return id;
    }

    static ItemSet advance(const std::vector<Item>& items) {
        ItemSet out;
        out.reserve(items.size());
        for (auto [r, d] : items) out.emplace_back(r, d + 1);
        return out;
    }

    void build_states() {
        intern_state({{aug_rule, 0}});

        size_t keys = static_cast<size_t>(t.eof_key_) + 1;
        for (size_t s = 0; s < states.size(); ++s) {
            ItemSet items = states[s];  // copy: states grows while we append

            struct TermGroup {
                std::map<std::pair<std::string, std::string>, std::vector<Item>> conditioned;
                std::vector<Item> unconditioned;
            };
            std::map<int, TermGroup> term_groups;
            std::map<int, std::vector<Item>> nt_groups;
            std::vector<int> completed;
            bool aug_complete = false;

            for (const Item& item : items) {
                auto [r, d] = item;
                const auto& symbols = rhs[r];
                if (d >= static_cast<int>(symbols.size())) {
                    if (r == aug_rule)
                        aug_complete = true;
                    else
                        completed.push_back(r);
                    continue;
                }
                const BuilderSym& sym = symbols[d];
                if (sym.is_term) {
                    TermGroup& group = term_groups[sym.key];
                    if (sym.cond)
                        group.conditioned[{sym.cond->property, sym.cond->value}].push_back(item);
                    else
                        group.unconditioned.push_back(item);
                } else {
                    nt_groups[sym.nt].push_back(item);
                }
            }
            std::sort(completed.begin(), completed.end());  // priority order

            if (t.action_index_.size() <= s) {
                t.action_index_.resize(s + 1);
                t.gotos_.resize(s + 1);
            }
            t.action_index_[s].assign(keys, -1);
            t.gotos_[s].assign(t.nt_names_.size(), -1);

            // shifts, splitting on condition values where present: the
            // value branch advances the conditioned items only, the
            // unconditioned items go to the `other` state
            std::map<int, DecisionTable> shifts;
            for (auto& [key, group] : term_groups) {
                DecisionTable dt;
                int other = -1;
                if (!group.unconditioned.empty())
                    other = intern_state(advance(group.unconditioned));
                if (group.conditioned.empty()) {
                    dt.other_state = other;
                } else {
                    const std::string& prop = group.conditioned.begin()->first.first;
                    for (const auto& [cond, cond_items] : group.conditioned) {
                        if (cond.first != prop) {
                            std::ostringstream msg;
                            msg << "state " << s << ": conditions on different properties ('"
                                << prop << "' and '" << cond.first << "') for token "
                                << to_string_key(key) << " (rules";
                            for (const Item& it2 : cond_items)
                                msg << " " << g.rules[it2.first].display_name();
                            msg << "); multi-property split is unsupported";
                            throw Error(msg.str());
                        }
                        dt.value_to_state[cond.second] = intern_state(advance(cond_items));
                    }
                    dt.property = prop;
                    dt.other_state = other;
                }
                shifts.emplace(key, std::move(dt));
            }

            for (auto& [nt, nt_items] : nt_groups)
                t.gotos_[s][nt] = intern_state(advance(nt_items));

            // one prioritized entry per viable (state, token class)
            for (size_t key = 0; key < keys; ++key) {
                ActionEntry entry;
                auto sh = shifts.find(static_cast<int>(key));
                if (sh != shifts.end()) entry.shift = sh->second;
                for (int r : completed)
                    if (follow_sets[lhs[r]][key]) entry.reduces.push_back(r);
                entry.accept = aug_complete && static_cast<int>(key) == t.eof_key_;
                if (entry.shift || !entry.reduces.empty() || entry.accept) {
                    t.action_index_[s][key] = static_cast<int>(t.entries_.size());
                    t.entries_.push_back(std::move(entry));
                }
            }

            // conflict census for the generator report
            if (!completed.empty()) {
                for (int r : completed) {
                    for (const auto& [key, dt] : shifts) {
                        (void)dt;
                        if (follow_sets[lhs[r]][key]) ++t.conflicts_.shift_reduce;
                    }
                }
                for (size_t i = 0; i < completed.size(); ++i)
                    for (size_t j = i + 1; j < completed.size(); ++j) {
                        const auto& fa = follow_sets[lhs[completed[i]]];
                        const auto& fb = follow_sets[lhs[completed[j]]];
                        for (size_t k = 0; k < fa.size(); ++k)
                            if (fa[k] && fb[k]) {
                                ++t.conflicts_.reduce_reduce;
                                break;
                            }
                    }
            }
        }
    }

    std::string to_string_key(int key) const {
        if (key == t.eof_key_) return "$";
        const std::string& cls = t.class_names_[key / 3];
        switch (static_cast<TokKind>(key % 3)) {
            case TokKind::Open: return "<" + cls + ">";
            case TokKind::Close: return "</" + cls + ">";
            case TokKind::Leaf: return "<" + cls + "/>";
        }
        return "?";
    }
};

} // namespace detail

ParserTables build_tables(const Grammar& grammar) {
    ParserTables t;
    t.grammar_ = grammar;
    detail::TablesBuilder b(t.grammar_, t);
    b.index_symbols();
    b.compute_first_follow();
    b.build_states();
    return t;
}

int ParserTables::token_key(TokKind kind, std::string_view class_name) const {
    auto it = class_ids_.find(class_name);
    if (it == class_ids_.end()) return -1;
    return it->second * 3 + static_cast<int>(kind);
}

const ActionEntry* ParserTables::action(int state, int key) const {
    if (key < 0) return nullptr;
    int idx = action_index_[state][key];
    return idx < 0 ? nullptr : &entries_[idx];
}

int ParserTables::goto_state(int state, std::string_view nonterminal) const {
    auto it = nt_ids_.find(nonterminal);
    if (it == nt_ids_.end()) return -1;
    return gotos_[state][it->second];
}

std::string ParserTables::dump() const {
    std::ostringstream out;
    out << "states: " << state_count() << "\n";
    out << "shift-reduce conflicts: " << conflicts_.shift_reduce << "\n";
    out << "reduce-reduce conflicts: " << conflicts_.reduce_reduce << "\n";
    auto key_name = [&](int key) -> std::string {
        if (key == eof_key_) return "$";
        const std::string& cls = class_names_[key / 3];
        switch (static_cast<TokKind>(key % 3)) {
            case TokKind::Open: return "<" + cls + ">";
            case TokKind::Close: return "</" + cls + ">";
            case TokKind::Leaf: return "<" + cls + "/>";
        }
        return "?";
    };
    for (int s = 0; s < state_count(); ++s) {
        out << "state " << s << "\n";
        for (int key = 0; key <= eof_key_; ++key) {
            const ActionEntry* entry = action(s, key);
            if (!entry) continue;
            out << "  " << key_name(key) << " -> ";
            bool first = true;
            if (entry->shift) {
                const DecisionTable& dt = *entry->shift;
                out << "Shift{";
                if (dt.property.empty()) {
                    out << "->" << dt.other_state;
                } else {
                    out << dt.property << ":";
                    for (const auto& [value, target] : dt.value_to_state)
                        out << " \"" << value << "\"->" << target << ",";
                    out << " other->";
                    if (dt.other_state >= 0)
                        out << dt.other_state;
                    else
                        out << "none";
                }
                out << "}";
                first = false;
            }
            for (int r : entry->reduces) {
                if (!first) out << ", ";
                out << "Reduce(" << grammar_.rules[r].display_name() << ")";
                first = false;
            }
            if (entry->accept) {
                if (!first) out << ", ";
                out << "Accept";
            }
            out << "\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// parse engine

namespace {

// Parse-time tree values; immutable once pushed so choice points can
// share structure with the live stack.
struct PVNode;
using PVNodePtr = std::shared_ptr<const PVNode>;

struct PList {
    PVNodePtr head;
    std::shared_ptr<const PList> tail;
};
using PListPtr = std::shared_ptr<const PList>;

struct PNative {
    const Token* source = nullptr;  // open or leaf token
    std::string class_name;
    std::vector<PVNodePtr> children;
};

struct PVirtual {
    const VirtualWidgetDef* def = nullptr;
    const Pattern* pattern = nullptr;
    std::map<std::string, std::string> properties;
    std::map<std::string, std::string> captures;
    int tok_begin = 0;
    int tok_end = 0;
};

struct PVNode {
    std::variant<PNative, PVirtual> v;
};

struct SemValue {
    enum class Kind { None, Token, Node, List };
    Kind kind = Kind::None;
    int token = -1;
    PVNodePtr node;
    PListPtr list;
};

struct StackNode {
    int state = 0;
    SemValue value;
    int start_pos = 0;
    std::shared_ptr<const StackNode> prev;
};
using StackPtr = std::shared_ptr<const StackNode>;

enum class RuleKind {
    Start,
    WidgetWrap,
    ListCons,
    ListNil,
    RepGroup,
    NativeContainer,
    NativeLeaf,
    PatternReduce,
};

struct RuleExec {
    RuleKind kind = RuleKind::WidgetWrap;
    int rhs_len = 0;
    const std::string* lhs = nullptr;
    const Rule* rule = nullptr;
    // pattern reduces only:
    const VirtualWidgetDef* def = nullptr;
    const Pattern* pattern = nullptr;
    std::vector<std::pair<int, const std::string*>> captures;  // rhs index -> node id
};

struct Alt {
    enum class Kind { Shift, Reduce, Accept };
    Kind kind = Kind::Shift;
    int target = -1;  // state for Shift, rule for Reduce
};

std::vector<RuleExec> build_plan(const Grammar& g, const std::vector<VirtualWidgetDef>& defs) {
    std::vector<RuleExec> plan(g.rules.size());
    for (size_t i = 0; i < g.rules.size(); ++i) {
        const Rule& rule = g.rules[i];
        RuleExec& exec = plan[i];
        exec.rhs_len = static_cast<int>(rule.rhs.size());
        exec.lhs = &rule.lhs;
        exec.rule = &rule;
        switch (rule.provenance.kind) {
            case RuleProvenance::Kind::Structural:
                if (rule.provenance.label == "start")
                    exec.kind = RuleKind::Start;
                else if (rule.provenance.label == "widget")
                    exec.kind = RuleKind::WidgetWrap;
                else
                    exec.kind = exec.rhs_len == 0 ? RuleKind::ListNil : RuleKind::ListCons;
                break;
            case RuleProvenance::Kind::Native:
                exec.kind = exec.rhs_len == 1 ? RuleKind::NativeLeaf : RuleKind::NativeContainer;
                break;
            case RuleProvenance::Kind::Pattern: {
                if (rule.lhs != "VirtualWidget") {
                    exec.kind = RuleKind::RepGroup;
                    break;
                }
                exec.kind = RuleKind::PatternReduce;
                exec.def = find_def(defs, rule.provenance.def_name);
                if (!exec.def)
                    throw Error("tables reference unknown virtual widget '" +
                                rule.provenance.def_name + "'");
                exec.pattern = exec.def->find_pattern(rule.provenance.pattern_index);
                if (!exec.pattern)
                    throw Error("tables reference missing pattern " + rule.display_name());
                for (int p = 0; p < exec.rhs_len; ++p) {
                    const GrammarSymbol& sym = rule.rhs[p];
                    if (sym.kind == GrammarSymbol::Kind::Terminal &&
                        !sym.terminal.capture_id.empty())
                        exec.captures.emplace_back(p, &sym.terminal.capture_id);
                }
                break;
            }
        }
    }
    return plan;
}

// Rebuilds the exact native widgets covered by a token slice.
std::vector<Widget> rebuild_widgets(const std::vector<Token>& tokens, int begin, int end) {
    std::vector<Widget> roots;
    std::vector<Widget*> open;
    for (int i = begin; i < end; ++i) {
        const Token& tok = tokens[i];
        if (tok.kind == TokKind::Close) {
            open.pop_back();
            continue;
        }
        Widget w;
        w.class_name = tok.class_name;
        w.id = tok.widget_id;
        w.properties = tok.properties;
        std::vector<Widget>& target = open.empty() ? roots : open.back()->children;
        target.push_back(std::move(w));
        if (tok.kind == TokKind::Open) open.push_back(&target.back());
    }
    return roots;
}

struct ChoicePoint {
    StackPtr stack;
    int pos = 0;
    std::vector<Alt> alts;
    size_t next = 1;
};

class ParseSession {
public:
    ParseSession(const std::vector<Token>& tokens, const ParserTables& tables,
                 const std::vector<VirtualWidgetDef>& defs)
        : tokens_(tokens), tables_(tables), plan_(build_plan(tables.grammar(), defs)) {
        keys_.reserve(tokens.size());
        for (const Token& tok : tokens) {
            int key = tables.token_key(tok.kind, tok.class_name);
            if (key < 0)
                throw Error("token class '" + tok.class_name +
                            "' is unknown to the parser tables (model/metamodel mismatch)");
            keys_.push_back(key);
        }
        stats_.input_tokens = static_cast<long>(tokens.size());
    }

    ParseResult run() {
        stack_ = std::make_shared<StackNode>();
        pos_ = 0;
        int n = static_cast<int>(tokens_.size());

        for (;;) {
            int key = pos_ < n ? keys_[pos_] : tables_.eof_key();
            const ActionEntry* entry = tables_.action(stack_->state, key);
            size_t count = entry ? expand(*entry) : 0;
            if (count == 0) {
                backtrack();
                continue;
            }
            if (count > 1) {
                ++stats_.conflicts;
                choice_points_.push_back(
                    {stack_, pos_, std::vector<Alt>(scratch_.begin(), scratch_.begin() + count),
                     1});
            }
            Alt alt = scratch_[0];
            if (alt.kind == Alt::Kind::Accept) return finish();
            if (!apply(alt)) backtrack();
        }
    }

private:
    size_t expand(const ActionEntry& entry) {
        size_t count = 0;
        if (entry.shift) {
            const DecisionTable& dt = *entry.shift;
            if (dt.property.empty()) {
                scratch_[count++] = {Alt::Kind::Shift, dt.other_state};
            } else {
                const std::string* value =
                    pos_ < static_cast<int>(tokens_.size())
                        ? tokens_[pos_].properties.find(dt.property)
                        : nullptr;
                auto hit = value ? dt.value_to_state.find(*value) : dt.value_to_state.end();
                if (hit != dt.value_to_state.end()) {
                    scratch_[count++] = {Alt::Kind::Shift, hit->second};
                    if (dt.other_state >= 0)
                        scratch_[count++] = {Alt::Kind::Shift, dt.other_state};
                } else if (dt.other_state >= 0) {
                    scratch_[count++] = {Alt::Kind::Shift, dt.other_state};
                }
            }
        }
        if (count + entry.reduces.size() + 1 > scratch_.size())
            throw Error("action entry exceeds the alternative limit");
        for (int r : entry.reduces) scratch_[count++] = {Alt::Kind::Reduce, r};
        if (entry.accept) scratch_[count++] = {Alt::Kind::Accept, -1};
        return count;
    }

    bool apply(const Alt& alt) {
        if (alt.kind == Alt::Kind::Shift) {
            auto node = std::make_shared<StackNode>();
            node->state = alt.target;
            node->value.kind = SemValue::Kind::Token;
            node->value.token = pos_;
            node->start_pos = pos_;
            node->prev = stack_;
            stack_ = std::move(node);
            ++pos_;
            ++stats_.shifts;
            return true;
        }
        return reduce(alt.target);
    }

    bool reduce(int rule_idx) {
        const RuleExec& exec = plan_[rule_idx];
        popped_.clear();
        StackPtr base = stack_;
        for (int i = 0; i < exec.rhs_len; ++i) {
            popped_.push_back(base.get());
            base = base->prev;
        }
        std::reverse(popped_.begin(), popped_.end());
        int start_pos = exec.rhs_len > 0 ? popped_.front()->start_pos : pos_;

        int target = tables_.goto_state(base->state, *exec.lhs);
        if (target < 0) return false;

        auto node = std::make_shared<StackNode>();
        node->state = target;
        node->start_pos = start_pos;
        node->value = evaluate(exec, start_pos);
        node->prev = std::move(base);
        stack_ = std::move(node);
        return true;
    }

    SemValue evaluate(const RuleExec& exec, int start_pos) {
        SemValue out;
        switch (exec.kind) {
            case RuleKind::Start:
            case RuleKind::NativeContainer: {
                PNative native;
                native.source = &tokens_[popped_[0]->value.token];
                native.class_name = native.source->class_name;
                for (PListPtr list = popped_[1]->value.list; list; list = list->tail)
                    native.children.push_back(list->head);
                out.kind = SemValue::Kind::Node;
                out.node = std::make_shared<PVNode>(PVNode{std::move(native)});
                break;
            }
            case RuleKind::NativeLeaf: {
                PNative native;
                native.source = &tokens_[popped_[0]->value.token];
                native.class_name = native.source->class_name;
                out.kind = SemValue::Kind::Node;
                out.node = std::make_shared<PVNode>(PVNode{std::move(native)});
                break;
            }
            case RuleKind::WidgetWrap:
                return popped_[0]->value;
            case RuleKind::ListCons: {
                out.kind = SemValue::Kind::List;
                out.list = std::make_shared<PList>(
                    PList{popped_[0]->value.node, popped_[1]->value.list});
                break;
            }
            case RuleKind::ListNil:
                out.kind = SemValue::Kind::List;
                break;
            case RuleKind::RepGroup:
                out.kind = SemValue::Kind::None;
                break;
            case RuleKind::PatternReduce: {
                PVirtual virt;
                virt.def = exec.def;
                virt.pattern = exec.pattern;
                virt.tok_begin = start_pos;
                virt.tok_end = pos_;
                for (const auto& [rhs_idx, cap_id] : exec.captures) {
                    const Token& tok = tokens_[popped_[rhs_idx]->value.token];
                    virt.captures[*cap_id] = tok.widget_id;
                }
                for (const Equation& eq : exec.pattern->bindings) {
                    for (const auto& [rhs_idx, cap_id] : exec.captures) {
                        if (*cap_id != eq.node_id) continue;
                        const Token& tok = tokens_[popped_[rhs_idx]->value.token];
                        virt.properties[eq.virtual_prop] =
                            tok.properties.get_or(eq.native_prop);
                        break;
                    }
                }
                out.kind = SemValue::Kind::Node;
                out.node = std::make_shared<PVNode>(PVNode{std::move(virt)});
                break;
            }
        }
        return out;
    }

    void backtrack() {
        while (!choice_points_.empty()) {
            ChoicePoint& cp = choice_points_.back();
            ++stats_.backtrack_ops;
            stats_.backtracked_tokens += pos_ - cp.pos;
            stack_ = cp.stack;
            pos_ = cp.pos;
            Alt alt = cp.alts[cp.next++];
            if (cp.next >= cp.alts.size()) choice_points_.pop_back();
            // the accept state is a singleton, so Accept never sits in a
            // choice point
            assert(alt.kind != Alt::Kind::Accept);
            if (apply(alt)) return;
        }
        std::ostringstream msg;
        msg << "parse failed at token " << pos_;
        if (pos_ < static_cast<int>(tokens_.size())) {
            const Token& tok = tokens_[pos_];
            msg << " (";
            switch (tok.kind) {
                case TokKind::Open: msg << "<" << tok.class_name << ">"; break;
                case TokKind::Close: msg << "</" << tok.class_name << ">"; break;
                case TokKind::Leaf: msg << "<" << tok.class_name << "/>"; break;
            }
            msg << ", widget '" << tok.widget_id << "')";
        } else {
            msg << " (end of input)";
        }
        msg << ": no viable alternative; the tables parse '" << tables_.root_class()
            << "' trees";
        throw Error(msg.str());
    }

    VNode convert(const PVNode& p) const {
        if (const PNative* native = std::get_if<PNative>(&p.v)) {
            NativeVNode out;
            out.class_name = native->class_name;
            out.id = native->source->widget_id;
            out.properties = native->source->properties;
            for (const PVNodePtr& child : native->children)
                out.children.push_back(convert(*child));
            return VNode{std::move(out)};
        }
        const PVirtual& virt = std::get<PVirtual>(p.v);
        VirtualNode out;
        out.def_name = virt.def->name;
        out.pattern_index = virt.pattern->index;
        out.properties = virt.properties;
        out.captures = virt.captures;
        out.provenance = rebuild_widgets(tokens_, virt.tok_begin, virt.tok_end);
        out.dirty = false;
        return VNode{std::move(out)};
    }

    ParseResult finish() {
        ParseResult result;
        result.model.root = convert(*stack_->value.node);
        assign_virtual_ids(result.model);
        result.stats = stats_;
        return result;
    }

    const std::vector<Token>& tokens_;
    const ParserTables& tables_;
    std::vector<RuleExec> plan_;
    std::vector<int> keys_;
    ParseStats stats_;
    StackPtr stack_;
    int pos_ = 0;
    std::vector<ChoicePoint> choice_points_;
    std::array<Alt, 16> scratch_{};
    std::vector<const StackNode*> popped_;
};

} // namespace

ParseResult parse(const std::vector<Token>& tokens, const ParserTables& tables,
                  const std::vector<VirtualWidgetDef>& defs) {
    ParseSession session(tokens, tables, defs);
    return session.run();
}

ParseResult parse_model(const Model& model, const ParserTables& tables,
                        const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm) {
    ParseResult result = parse(tokenize(model, mm), tables, defs);
    result.model.source_uri = model.source_uri;
    return result;
}

ParseResult parse_subtree(const Model& model, std::string_view widget_id,
                          const ParserTables& tables,
                          const std::vector<VirtualWidgetDef>& defs, const Metamodel& mm) {
    const Widget* widget = find_widget(model, widget_id);
    if (!widget) throw Error("unknown widget id '" + std::string(widget_id) + "'");
    if (widget->class_name != tables.root_class())
        throw Error("widget '" + std::string(widget_id) + "' has class '" + widget->class_name +
                    "' but the tables parse '" + tables.root_class() + "' subtrees");
    Model sub;
    sub.root = *widget;
    sub.source_uri = model.source_uri;
    return parse_model(sub, tables, defs, mm);
}

} // namespace virtree

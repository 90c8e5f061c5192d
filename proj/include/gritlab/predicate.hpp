#pragma once

#include "gritlab/core.hpp"

#include <cctype>
#include <memory>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gritlab {

/**
Admission predicate over the extended (x, u) vector.

Grammar:
    expr  := term ( "or" term )*
    term  := factor ( "and" factor )*
    factor:= "(" expr ")" | atom
    atom  := ( "value" | "delta" ) "(" comp ")" op number
    op    := ">=" | "<=" | ">" | "<"
    comp  := integer index, or a component name when names are supplied

`value(j)` is read at the end of the window, `delta(j)` is x_j(t2) - x_j(t1).
*/
class Predicate {
public:
    enum class Quantity { value, delta };
    enum class Op { ge, le, gt, lt };

    struct Atom {
        Quantity quantity;
        std::size_t component;
        Op op;
        double threshold;
    };

    Predicate() = default;

    static Predicate parse(std::string_view text, std::span<const std::string> names = {}) {
        Parser p{text, names};
        Predicate out;
        out.root_ = p.parse_expr();
        p.skip_ws();
        if (!p.done()) p.fail("unexpected trailing input");
        out.text_ = std::string(text);
        return out;
    }

    static Predicate atom(Quantity q, std::size_t component, Op op, double threshold) {
        Predicate out;
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::atom;
        node->atom = Atom{q, component, op, threshold};
        out.root_ = node;
        out.text_ = describe(node->atom);
        return out;
    }

    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

    std::set<std::size_t> components() const {
        std::set<std::size_t> out;
        if (root_) collect(*root_, out);
        return out;
    }

    bool uses_delta() const { return root_ && any_delta(*root_); }

    /// Window evaluation: `before` at t1, `after` at t2, both extended vectors.
    bool holds(std::span<const double> before, std::span<const double> after) const {
        if (!root_) throw SchemaError("empty predicate");
        return eval(*root_, before, after);
    }

    /// Single-state admission; delta atoms read as zero change.
    bool admits(std::span<const double> state) const { return holds(state, state); }

    void check_dims(std::size_t dims) const {
        for (auto j : components())
            if (j >= dims)
                throw SchemaError("predicate '" + text_ + "' references component " + std::to_string(j) +
                                  " but only " + std::to_string(dims) + " components exist");
    }

    /// The atoms, in source order.
    std::vector<Atom> atoms() const {
        std::vector<Atom> out;
        if (root_) collect_atoms(*root_, out);
        return out;
    }

    bool is_conjunction() const { return !root_ || conj_only(*root_); }

private:
    struct Node {
        enum class Kind { atom, all, any } kind = Kind::atom;
        Atom atom{};
        std::vector<std::shared_ptr<const Node>> children;
    };

    static std::string describe(const Atom& a) {
        std::ostringstream os;
        os << (a.quantity == Quantity::value ? "value(" : "delta(") << a.component << ") ";
        switch (a.op) {
        case Op::ge: os << ">="; break;
        case Op::le: os << "<="; break;
        case Op::gt: os << ">"; break;
        case Op::lt: os << "<"; break;
        }
        os << ' ' << a.threshold;
        return os.str();
    }

    static bool compare(double v, Op op, double c) {
        switch (op) {
        case Op::ge: return v >= c;
        case Op::le: return v <= c;
        case Op::gt: return v > c;
        case Op::lt: return v < c;
        }
        return false;
    }

    static bool eval(const Node& n, std::span<const double> before, std::span<const double> after) {
        switch (n.kind) {
        case Node::Kind::atom: {
            const auto& a = n.atom;
            if (a.component >= after.size() || a.component >= before.size())
                throw SchemaError("predicate references component " + std::to_string(a.component) +
                                  " but the state has " + std::to_string(after.size()) + " components");
            const double v = a.quantity == Quantity::value ? after[a.component]
                                                           : after[a.component] - before[a.component];
            return compare(v, a.op, a.threshold);
        }
        case Node::Kind::all:
            for (const auto& c : n.children)
                if (!eval(*c, before, after)) return false;
            return true;
        case Node::Kind::any:
            for (const auto& c : n.children)
                if (eval(*c, before, after)) return true;
            return false;
        }
        return false;
    }

    static void collect(const Node& n, std::set<std::size_t>& out) {
        if (n.kind == Node::Kind::atom) out.insert(n.atom.component);
        for (const auto& c : n.children) collect(*c, out);
    }

    static void collect_atoms(const Node& n, std::vector<Atom>& out) {
        if (n.kind == Node::Kind::atom) out.push_back(n.atom);
        for (const auto& c : n.children) collect_atoms(*c, out);
    }

    static bool any_delta(const Node& n) {
        if (n.kind == Node::Kind::atom) return n.atom.quantity == Quantity::delta;
        for (const auto& c : n.children)
            if (any_delta(*c)) return true;
        return false;
    }

    static bool conj_only(const Node& n) {
        if (n.kind == Node::Kind::any) return false;
        for (const auto& c : n.children)
            if (!conj_only(*c)) return false;
        return true;
    }

    struct Parser {
        std::string_view s;
        std::span<const std::string> names;
        std::size_t pos = 0;

        [[noreturn]] void fail(const std::string& why) const {
            throw SchemaError("cannot parse predicate '" + std::string(s) + "' at column " +
                              std::to_string(pos + 1) + ": " + why);
        }
        bool done() const { return pos >= s.size(); }
        void skip_ws() {
            while (!done() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(std::string_view tok) {
            skip_ws();
            if (s.substr(pos, tok.size()) != tok) return false;
            // keywords must not run into identifiers
            if (std::isalpha(static_cast<unsigned char>(tok.back())) && pos + tok.size() < s.size() &&
                (std::isalnum(static_cast<unsigned char>(s[pos + tok.size()])) || s[pos + tok.size()] == '_'))
                return false;
            pos += tok.size();
            return true;
        }
        void expect(std::string_view tok) {
            if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
        }

        std::shared_ptr<const Node> parse_expr() {
            std::vector<std::shared_ptr<const Node>> parts{parse_term()};
            while (accept("or")) parts.push_back(parse_term());
            if (parts.size() == 1) return parts.front();
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::any;
            n->children = std::move(parts);
            return n;
        }

        std::shared_ptr<const Node> parse_term() {
            std::vector<std::shared_ptr<const Node>> parts{parse_factor()};
            while (accept("and")) parts.push_back(parse_factor());
            if (parts.size() == 1) return parts.front();
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::all;
            n->children = std::move(parts);
            return n;
        }

        std::shared_ptr<const Node> parse_factor() {
            if (accept("(")) {
                auto inner = parse_expr();
                expect(")");
                return inner;
            }
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::atom;
            if (accept("value")) n->atom.quantity = Quantity::value;
            else if (accept("delta")) n->atom.quantity = Quantity::delta;
            else fail("expected 'value' or 'delta'");
            expect("(");
            n->atom.component = parse_component();
            expect(")");
            skip_ws();
            if (accept(">=")) n->atom.op = Op::ge;
            else if (accept("<=")) n->atom.op = Op::le;
            else if (accept(">")) n->atom.op = Op::gt;
            else if (accept("<")) n->atom.op = Op::lt;
            else fail("expected comparison operator");
            n->atom.threshold = parse_number();
            return n;
        }

        std::size_t parse_component() {
            skip_ws();
            const auto start = pos;
            while (!done() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
            const std::string tok(s.substr(start, pos - start));
            if (tok.empty()) fail("expected component index or name");
            if (std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                return std::stoul(tok);
            for (std::size_t j = 0; j < names.size(); ++j)
                if (names[j] == tok) return j;
            pos = start;
            fail("unknown component '" + tok + "'");
        }

        double parse_number() {
            skip_ws();
            const auto start = pos;
            while (!done() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' || s[pos] == '-' ||
                               s[pos] == '+' || s[pos] == 'e' || s[pos] == 'E'))
                ++pos;
            const std::string tok(s.substr(start, pos - start));
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                return v;
            } catch (const std::exception&) {
                pos = start;
                fail("expected number");
            }
        }
    };

    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace gritlab

#include "ml4c/bif.hpp"

#include "ml4c/errors.hpp"
#include "ml4c/io.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>

namespace ml4c {

namespace {

constexpr double kRowTolerance = 1e-6;

struct Token {
    enum Kind { Word, Punct, End } kind = End;
    std::string text;
    int line = 1;
    int column = 1;
};

bool is_punct(char c) {
    switch (c) {
    case '{': case '}': case '(': case ')': case '[': case ']': case ';': case ',': case '|':
        return true;
    default:
        return false;
    }
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (; k > 0 && i < text.size(); --k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
        } else if (text.compare(i, 2, "//") == 0) {
            while (i < text.size() && text[i] != '\n')
                advance(1);
        } else if (text.compare(i, 2, "/*") == 0) {
            const int l = line, cc = col;
            const auto end = text.find("*/", i + 2);
            if (end == std::string::npos)
                throw ParseError("unterminated comment", l, cc);
            advance(end + 2 - i);
        } else if (is_punct(c)) {
            out.push_back({Token::Punct, std::string(1, c), line, col});
            advance(1);
        } else {
            Token t{Token::Word, {}, line, col};
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && !is_punct(text[i]) &&
                   text.compare(i, 2, "//") != 0 && text.compare(i, 2, "/*") != 0) {
                t.text += text[i];
                advance(1);
            }
            out.push_back(std::move(t));
        }
    }
    out.push_back({Token::End, {}, line, col});
    return out;
}

struct Variable {
    std::string name;
    std::vector<std::string> states;
    Token at;
};

struct ProbRow {
    std::vector<Token> parent_states;
    std::vector<double> values;
    Token at;
};

struct ProbBlock {
    Token child;
    std::vector<Token> parents;
    std::optional<ProbRow> table;
    std::vector<ProbRow> rows;
    Token close;
};

class Parser {
public:
    explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

    BayesNet parse() {
        while (peek().kind != Token::End) {
            const Token kw = expect_word("a block keyword");
            if (kw.text == "network")
                skip_network();
            else if (kw.text == "variable")
                parse_variable();
            else if (kw.text == "probability")
                parse_probability();
            else
                fail(kw, "expected 'network', 'variable' or 'probability', found '" + kw.text + "'");
        }
        return assemble();
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token next() {
        const Token& t = tokens_[pos_];
        if (t.kind != Token::End)
            ++pos_;
        return t;
    }
    [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.column); }

    bool at_punct(char c) const { return peek().kind == Token::Punct && peek().text[0] == c; }
    Token expect_punct(char c) {
        if (!at_punct(c))
            fail(peek(), std::string("expected '") + c + "'" + found());
        return next();
    }
    Token expect_word(const char* what) {
        if (peek().kind != Token::Word)
            fail(peek(), std::string("expected ") + what + found());
        return next();
    }
    std::string found() const {
        return peek().kind == Token::End ? ", found end of input" : ", found '" + peek().text + "'";
    }

    double expect_number() {
        const Token t = expect_word("a probability");
        double v = 0.0;
        const auto* first = t.text.data();
        const auto* last = first + t.text.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            fail(t, "'" + t.text + "' is not a number");
        if (v < 0.0)
            fail(t, "negative probability " + t.text);
        return v;
    }

    void skip_until_semicolon() {
        while (!at_punct(';')) {
            if (peek().kind == Token::End)
                fail(peek(), "expected ';'" + found());
            next();
        }
        next();
    }

    void skip_network() {
        while (!at_punct('{')) {
            if (peek().kind == Token::End)
                fail(peek(), "expected '{'" + found());
            next();
        }
        int depth = 0;
        do {
            const Token t = next();
            if (t.kind == Token::End)
                fail(t, "unterminated network block");
            if (t.kind == Token::Punct && t.text[0] == '{')
                ++depth;
            if (t.kind == Token::Punct && t.text[0] == '}')
                --depth;
        } while (depth > 0);
    }

    void parse_variable() {
        Variable v;
        v.at = expect_word("a variable name");
        v.name = v.at.text;
        expect_punct('{');
        bool typed = false;
        while (!at_punct('}')) {
            const Token kw = expect_word("'type' or 'property'");
            if (kw.text == "property") {
                skip_until_semicolon();
            } else if (kw.text == "type") {
                const Token kind = expect_word("a variable type");
                if (kind.text != "discrete")
                    throw UnsupportedFeature("variable '" + v.name + "' has type '" + kind.text +
                                             "'; only discrete variables are supported (line " +
                                             std::to_string(kind.line) + ")");
                expect_punct('[');
                const Token count = expect_word("a state count");
                int k = 0;
                const auto [ptr, ec] = std::from_chars(count.text.data(), count.text.data() + count.text.size(), k);
                if (ec != std::errc() || ptr != count.text.data() + count.text.size() || k < 1)
                    fail(count, "'" + count.text + "' is not a positive state count");
                expect_punct(']');
                expect_punct('{');
                while (true) {
                    v.states.push_back(expect_word("a state name").text);
                    if (at_punct('}'))
                        break;
                    expect_punct(',');
                }
                const Token close = expect_punct('}');
                expect_punct(';');
                if (static_cast<int>(v.states.size()) != k)
                    fail(close, "variable '" + v.name + "' declares " + std::to_string(k) + " states but lists " +
                                    std::to_string(v.states.size()));
                auto sorted = v.states;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    fail(close, "variable '" + v.name + "' repeats a state name");
                typed = true;
            } else {
                fail(kw, "unexpected '" + kw.text + "' in variable block");
            }
        }
        const Token close = expect_punct('}');
        if (!typed)
            fail(close, "variable '" + v.name + "' has no type");
        if (std::any_of(variables_.begin(), variables_.end(), [&](const Variable& o) { return o.name == v.name; }))
            fail(v.at, "variable '" + v.name + "' declared twice");
        variables_.push_back(std::move(v));
    }

    std::vector<double> parse_values() {
        std::vector<double> out;
        while (true) {
            out.push_back(expect_number());
            if (at_punct(';'))
                break;
            expect_punct(',');
        }
        next();
        return out;
    }

    void parse_probability() {
        ProbBlock b;
        expect_punct('(');
        b.child = expect_word("a variable name");
        if (at_punct('|')) {
            next();
            while (true) {
                b.parents.push_back(expect_word("a parent name"));
                if (at_punct(')'))
                    break;
                expect_punct(',');
            }
        }
        expect_punct(')');
        expect_punct('{');
        while (!at_punct('}')) {
            if (at_punct('(')) {
                ProbRow row;
                row.at = next();
                while (true) {
                    row.parent_states.push_back(expect_word("a parent state"));
                    if (at_punct(')'))
                        break;
                    expect_punct(',');
                }
                next();
                row.values = parse_values();
                b.rows.push_back(std::move(row));
                continue;
            }
            const Token kw = expect_word("'table', a parent-state row or 'property'");
            if (kw.text == "table") {
                if (b.table)
                    fail(kw, "second table for '" + b.child.text + "'");
                ProbRow row;
                row.at = kw;
                row.values = parse_values();
                b.table = std::move(row);
            } else if (kw.text == "property") {
                skip_until_semicolon();
            } else if (kw.text == "default") {
                throw UnsupportedFeature("'default' probability rows are not supported (line " + std::to_string(kw.line) +
                                         ")");
            } else {
                fail(kw, "unexpected '" + kw.text + "' in probability block");
            }
        }
        b.close = expect_punct('}');
        if (b.table && !b.rows.empty())
            fail(b.close, "probability block for '" + b.child.text + "' mixes a table with rows");
        blocks_.push_back(std::move(b));
    }

    int node_of(const Token& t) const {
        for (std::size_t i = 0; i < variables_.size(); ++i)
            if (variables_[i].name == t.text)
                return static_cast<int>(i);
        fail(t, "unknown variable '" + t.text + "'");
    }

    int state_of(int node, const Token& t) const {
        const auto& states = variables_[static_cast<std::size_t>(node)].states;
        const auto it = std::find(states.begin(), states.end(), t.text);
        if (it == states.end())
            fail(t, "'" + t.text + "' is not a state of '" + variables_[static_cast<std::size_t>(node)].name + "'");
        return static_cast<int>(it - states.begin());
    }

    static void normalize(std::span<double> row, const Token& at) {
        double sum = 0.0;
        for (double v : row)
            sum += v;
        if (std::abs(sum - 1.0) > kRowTolerance)
            fail(at, "probabilities sum to " + std::to_string(sum) + ", not 1");
        for (double& v : row)
            v /= sum;
    }

    BayesNet assemble() {
        const int n = static_cast<int>(variables_.size());
        std::vector<std::string> names;
        std::vector<int> cards;
        for (const auto& v : variables_) {
            names.push_back(v.name);
            cards.push_back(static_cast<int>(v.states.size()));
        }
        std::vector<std::optional<Cpt>> cpts(static_cast<std::size_t>(n));
        std::vector<Edge> edges;
        for (const auto& b : blocks_) {
            const int child = node_of(b.child);
            if (cpts[static_cast<std::size_t>(child)])
                fail(b.child, "second probability block for '" + b.child.text + "'");
            std::vector<int> bif_parents;
            for (const auto& p : b.parents) {
                const int id = node_of(p);
                if (id == child || std::find(bif_parents.begin(), bif_parents.end(), id) != bif_parents.end())
                    fail(p, "bad parent '" + p.text + "' for '" + b.child.text + "'");
                bif_parents.push_back(id);
                edges.emplace_back(id, child);
            }
            Cpt cpt;
            cpt.node = child;
            cpt.cardinality = cards[static_cast<std::size_t>(child)];
            cpt.parents = make_node_set(bif_parents);
            for (NodeId p : cpt.parents)
                cpt.parent_cardinalities.push_back(cards[static_cast<std::size_t>(p)]);
            int n_rows = 1;
            for (int c : cpt.parent_cardinalities)
                n_rows *= c;
            const auto k = static_cast<std::size_t>(cpt.cardinality);
            cpt.table.assign(static_cast<std::size_t>(n_rows) * k, 0.0);

            // Row of the sorted-parent CPT for a BIF-ordered parent assignment.
            auto row_of = [&](const std::vector<int>& bif_values) {
                std::vector<int> sorted_values(cpt.parents.size());
                for (std::size_t j = 0; j < bif_parents.size(); ++j) {
                    const auto pos = std::lower_bound(cpt.parents.begin(), cpt.parents.end(), bif_parents[j]) -
                                     cpt.parents.begin();
                    sorted_values[static_cast<std::size_t>(pos)] = bif_values[j];
                }
                return cpt.row_index(sorted_values);
            };

            if (b.table) {
                const auto& vals = b.table->values;
                if (vals.size() != static_cast<std::size_t>(n_rows) * k)
                    fail(b.table->at, "table for '" + b.child.text + "' has " + std::to_string(vals.size()) +
                                          " entries, expected " + std::to_string(static_cast<std::size_t>(n_rows) * k));
                std::vector<int> assignment(bif_parents.size(), 0);
                for (int a = 0; a < n_rows; ++a) {
                    // `a` enumerates BIF-order assignments, last parent fastest.
                    int rest = a;
                    for (std::size_t j = bif_parents.size(); j-- > 0;) {
                        const int c = cards[static_cast<std::size_t>(bif_parents[j])];
                        assignment[j] = rest % c;
                        rest /= c;
                    }
                    const auto r = static_cast<std::size_t>(row_of(assignment));
                    for (std::size_t s = 0; s < k; ++s)
                        cpt.table[r * k + s] = vals[s * static_cast<std::size_t>(n_rows) + static_cast<std::size_t>(a)];
                    normalize(std::span<double>(cpt.table).subspan(r * k, k), b.table->at);
                }
            } else {
                std::vector<char> seen(static_cast<std::size_t>(n_rows), 0);
                for (const auto& row : b.rows) {
                    if (row.parent_states.size() != bif_parents.size())
                        fail(row.at, "row lists " + std::to_string(row.parent_states.size()) + " parent states, expected " +
                                         std::to_string(bif_parents.size()));
                    if (row.values.size() != k)
                        fail(row.at, "row has " + std::to_string(row.values.size()) + " probabilities, expected " +
                                         std::to_string(k));
                    std::vector<int> assignment;
                    for (std::size_t j = 0; j < bif_parents.size(); ++j)
                        assignment.push_back(state_of(bif_parents[j], row.parent_states[j]));
                    const auto r = static_cast<std::size_t>(row_of(assignment));
                    if (seen[r])
                        fail(row.at, "repeated parent assignment");
                    seen[r] = 1;
                    std::copy(row.values.begin(), row.values.end(), cpt.table.begin() + static_cast<std::ptrdiff_t>(r * k));
                    normalize(std::span<double>(cpt.table).subspan(r * k, k), row.at);
                }
                if (std::find(seen.begin(), seen.end(), 0) != seen.end())
                    fail(b.close, "probability block for '" + b.child.text + "' misses parent assignments");
            }
            cpts[static_cast<std::size_t>(child)] = std::move(cpt);
        }
        BayesNet bn;
        for (int v = 0; v < n; ++v) {
            if (!cpts[static_cast<std::size_t>(v)])
                fail(variables_[static_cast<std::size_t>(v)].at, "no probability block for '" + names[static_cast<std::size_t>(v)] + "'");
            bn.cpts.push_back(std::move(*cpts[static_cast<std::size_t>(v)]));
            bn.state_names.push_back(variables_[static_cast<std::size_t>(v)].states);
        }
        bn.dag = Dag(std::move(names), std::move(edges));
        bn.cardinalities = std::move(cards);
        bn.validate();
        return bn;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<Variable> variables_;
    std::vector<ProbBlock> blocks_;
};

} // namespace

BayesNet parse_bif_text(const std::string& text) { return Parser(text).parse(); }

BayesNet parse_bif(const std::filesystem::path& path) { return parse_bif_text(read_text(path)); }

} // namespace ml4c

#include "rcr/model.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <sstream>

namespace rcr {

std::size_t FactorGraph::table_size(const Factor& f) const {
    std::size_t n = 1;
    for (int v : f.scope) n *= static_cast<std::size_t>(cardinality(v));
    return n;
}

void FactorGraph::validate() const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].id != static_cast<int>(i))
            throw contract_error("variable ids not contiguous from 0");
        if (variables[i].cardinality < 2)
            throw contract_error("variable cardinality < 2");
    }
    for (const Factor& f : factors) {
        for (int v : f.scope)
            if (v < 0 || v >= num_variables())
                throw contract_error("factor scope references unknown variable");
        if (f.table.size() != table_size(f))
            throw contract_error("factor table length does not match scope");
    }
}

namespace {

// Whitespace token stream that remembers line numbers for error messages.
class Lexer {
public:
    explicit Lexer(std::string text) : text_(std::move(text)) {}

    bool next(std::string_view& tok) {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
        if (pos_ >= text_.size()) return false;
        std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        tok = std::string_view(text_).substr(start, pos_ - start);
        return true;
    }

    std::string_view expect(const char* what) {
        std::string_view tok;
        if (!next(tok))
            throw parse_error("line " + std::to_string(line_) + ": expected " + what +
                              ", got end of input");
        return tok;
    }

    long long expect_int(const char* what) {
        std::string_view tok = expect(what);
        long long v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw parse_error("line " + std::to_string(line_) + ": expected " + what +
                              ", got '" + std::string(tok) + "'");
        return v;
    }

    double expect_real(const char* what) {
        std::string_view tok = expect(what);
        double v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw parse_error("line " + std::to_string(line_) + ": expected " + what +
                              ", got '" + std::string(tok) + "'");
        return v;
    }

    int line() const { return line_; }

private:
    static bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }
    std::string text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

std::string read_all(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

FactorGraph parse_uai(std::istream& in) { return parse_uai(read_all(in)); }

FactorGraph parse_uai(const std::string& text) {
    Lexer lex(text);
    std::string_view preamble = lex.expect("preamble (MARKOV or BAYES)");
    if (preamble != "MARKOV" && preamble != "BAYES")
        throw parse_error("line " + std::to_string(lex.line()) + ": unknown preamble '" +
                          std::string(preamble) + "' (expected MARKOV or BAYES)");

    FactorGraph fg;
    long long nvars = lex.expect_int("variable count");
    if (nvars < 0) throw parse_error("negative variable count");
    fg.variables.reserve(static_cast<std::size_t>(nvars));
    for (int i = 0; i < nvars; ++i) {
        long long card = lex.expect_int("variable cardinality");
        if (card < 2)
            throw unsupported_error("variable " + std::to_string(i) + " has cardinality " +
                                    std::to_string(card) + " (< 2 unsupported)");
        fg.variables.push_back({i, static_cast<int>(card), -1, -1});
    }

    long long nfactors = lex.expect_int("factor count");
    if (nfactors < 0) throw parse_error("negative factor count");
    fg.factors.reserve(static_cast<std::size_t>(nfactors));
    for (int i = 0; i < nfactors; ++i) {
        long long arity = lex.expect_int("factor arity");
        if (arity < 0) throw parse_error("negative factor arity");
        Factor f;
        f.id = i;
        std::vector<char> seen(static_cast<std::size_t>(nvars), 0);
        for (int k = 0; k < arity; ++k) {
            long long v = lex.expect_int("scope variable id");
            if (v < 0 || v >= nvars)
                throw parse_error("line " + std::to_string(lex.line()) + ": scope variable " +
                                  std::to_string(v) + " out of range");
            if (seen[static_cast<std::size_t>(v)])
                throw unsupported_error("factor " + std::to_string(i) +
                                        " repeats variable " + std::to_string(v) + " in its scope");
            seen[static_cast<std::size_t>(v)] = 1;
            f.scope.push_back(static_cast<int>(v));
        }
        fg.factors.push_back(std::move(f));
    }

    for (int i = 0; i < nfactors; ++i) {
        Factor& f = fg.factors[static_cast<std::size_t>(i)];
        long long count = lex.expect_int("factor table length");
        std::size_t expected = fg.table_size(f);
        if (count < 0 || static_cast<std::size_t>(count) != expected)
            throw parse_error("line " + std::to_string(lex.line()) + ": factor " +
                              std::to_string(i) + " table length " + std::to_string(count) +
                              " does not match scope (expected " + std::to_string(expected) + ")");
        f.table.reserve(expected);
        for (std::size_t k = 0; k < expected; ++k) {
            double v = lex.expect_real("factor table entry");
            if (v < 0.0)
                throw parse_error("line " + std::to_string(lex.line()) +
                                  ": negative table entry " + std::to_string(v));
            f.table.push_back(from_linear(v));
        }
    }

    std::string_view extra;
    if (Lexer copy = lex; copy.next(extra))
        throw parse_error("line " + std::to_string(lex.line()) + ": unexpected trailing token '" +
                          std::string(extra) + "'");

    fg.validate();
    return fg;
}

std::string serialize_uai(const FactorGraph& fg) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "MARKOV\n" << fg.num_variables() << "\n";
    for (int i = 0; i < fg.num_variables(); ++i) {
        if (i) out << ' ';
        out << fg.cardinality(i);
    }
    out << "\n" << fg.num_factors() << "\n";
    for (const Factor& f : fg.factors) {
        out << f.arity();
        for (int v : f.scope) out << ' ' << v;
        out << '\n';
    }
    for (const Factor& f : fg.factors) {
        out << '\n' << f.table.size() << '\n';
        for (std::size_t k = 0; k < f.table.size(); ++k) {
            if (k) out << ' ';
            out << to_linear(f.table[k]);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<std::pair<int, int>> parse_evidence(std::istream& in) {
    return parse_evidence(read_all(in));
}

std::vector<std::pair<int, int>> parse_evidence(const std::string& text) {
    Lexer lex(text);
    long long count = lex.expect_int("evidence count");
    if (count < 0) throw parse_error("negative evidence count");
    std::vector<std::pair<int, int>> ev;
    ev.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k) {
        long long var = lex.expect_int("evidence variable id");
        long long state = lex.expect_int("evidence state");
        ev.emplace_back(static_cast<int>(var), static_cast<int>(state));
    }
    return ev;
}

std::vector<std::size_t> factor_strides(const FactorGraph& fg, const Factor& f) {
    std::vector<std::size_t> strides(f.scope.size());
    std::size_t s = 1;
    for (std::size_t k = f.scope.size(); k-- > 0;) {
        strides[k] = s;
        s *= static_cast<std::size_t>(fg.cardinality(f.scope[k]));
    }
    return strides;
}

std::size_t factor_index(const FactorGraph& fg, const Factor& f, const Assignment& a) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < f.scope.size(); ++k) {
        idx = idx * static_cast<std::size_t>(fg.cardinality(f.scope[k])) +
              static_cast<std::size_t>(a[f.scope[k]]);
    }
    return idx;
}

double evaluate(const FactorGraph& fg, const Assignment& a) {
    if (a.size() != static_cast<std::size_t>(fg.num_variables()))
        throw contract_error("evaluate: assignment does not cover all variables");
    for (int v = 0; v < fg.num_variables(); ++v)
        if (a[v] < 0 || a[v] >= fg.cardinality(v))
            throw contract_error("evaluate: state out of range for variable " + std::to_string(v));
    double total = 0.0;
    for (const Factor& f : fg.factors) {
        total = log_mul(total, f.table[factor_index(fg, f, a)]);
        if (is_log_zero(total)) return kLogZero;
    }
    return total;
}

FactorGraph condition(const FactorGraph& fg, std::span<const std::pair<int, int>> evidence) {
    for (auto [var, state] : evidence) {
        if (var < 0 || var >= fg.num_variables())
            throw contract_error("condition: unknown variable " + std::to_string(var));
        if (state < 0 || state >= fg.cardinality(var))
            throw contract_error("condition: state " + std::to_string(state) +
                                 " out of range for variable " + std::to_string(var));
    }
    FactorGraph out = fg;
    for (Factor& f : out.factors) {
        auto strides = factor_strides(out, f);
        for (auto [var, state] : evidence) {
            for (std::size_t k = 0; k < f.scope.size(); ++k) {
                if (f.scope[k] != var) continue;
                std::size_t card = static_cast<std::size_t>(out.cardinality(var));
                for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
                    std::size_t s = (idx / strides[k]) % card;
                    if (s != static_cast<std::size_t>(state)) f.table[idx] = kLogZero;
                }
            }
        }
    }
    return out;
}

Factor equivalence_factor(int factor_id, int x, int y, int cardinality, int constraint_id) {
    Factor f;
    f.id = factor_id;
    f.scope = {x, y};
    f.kind = FactorKind::Equivalence;
    f.constraint = constraint_id;
    std::size_t card = static_cast<std::size_t>(cardinality);
    f.table.assign(card * card, kLogZero);
    for (std::size_t s = 0; s < card; ++s) f.table[s * card + s] = 0.0;
    return f;
}

}  // namespace rcr

#pragma once

// Surface language, de Bruijn core terms, and the closedness check for
// locus-annotated subterms.
//
// Grammar (`--` starts a line comment):
//
//   term    := 'fn' ident '.' term
//            | 'let' ident '=' term 'in' term
//            | 'if0' term 'then' term 'else' term
//            | located
//   located := sum ('@' Node)*
//   sum     := product (('+' | '-') product)*
//   product := app ('*' app)*
//   app     := atom atom*
//   atom    := ident | nat | '(' term ')'
//
// Identifiers start with a lowercase letter, node names with an uppercase
// one. `-` is truncated subtraction.

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dam/common.hpp"

namespace dam {

struct SourcePos {
    int line = 1;
    int column = 1;
};

class SyntaxError : public InputError {
public:
    SyntaxError(const std::string& msg, SourcePos pos);
    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

class ResolveError : public InputError {
public:
    explicit ResolveError(std::string identifier);
    const std::string& identifier() const { return identifier_; }

private:
    std::string identifier_;
};

// ---------------------------------------------------------------------------
// Surface terms (named variables)

struct SurfaceTerm;
using SurfacePtr = std::shared_ptr<const SurfaceTerm>;

struct SurfaceTerm {
    struct Var { std::string name; };
    struct Lam { std::string param; SurfacePtr body; };
    struct App { SurfacePtr fn; SurfacePtr arg; };
    struct Lit { Nat value; };
    struct BinOp { PrimOp op; SurfacePtr lhs; SurfacePtr rhs; };
    struct If0 { SurfacePtr cond; SurfacePtr then_branch; SurfacePtr else_branch; };
    struct At { SurfacePtr body; NodeName node; };
    struct Let { std::string name; SurfacePtr bound; SurfacePtr body; };

    using Node = std::variant<Var, Lam, App, Lit, BinOp, If0, At, Let>;
    Node node;
    SourcePos pos;
};

SurfacePtr parse(std::string_view text);

// Structural equality, ignoring source positions.
bool same_shape(const SurfaceTerm& a, const SurfaceTerm& b);

// ---------------------------------------------------------------------------
// Core terms (de Bruijn indices, innermost binder = 0)

struct CoreTerm;
using TermPtr = std::shared_ptr<const CoreTerm>;

struct CoreTerm {
    struct Lam { TermPtr body; };
    struct App { TermPtr fn; TermPtr arg; };
    struct Var { std::size_t index; };
    struct Lit { Nat value; };
    struct Op { PrimOp op; TermPtr lhs; TermPtr rhs; };
    struct If0 { TermPtr cond; TermPtr then_branch; TermPtr else_branch; };
    struct At { TermPtr body; NodeName node; };

    using Node = std::variant<Lam, App, Var, Lit, Op, If0, At>;
    Node node;
};

namespace term {
TermPtr lam(TermPtr body);
TermPtr app(TermPtr fn, TermPtr arg);
TermPtr var(std::size_t index);
TermPtr lit(Nat value);
TermPtr op(PrimOp op, TermPtr lhs, TermPtr rhs);
TermPtr if0(TermPtr cond, TermPtr then_branch, TermPtr else_branch);
TermPtr at(TermPtr body, NodeName node);
}  // namespace term

bool operator==(const CoreTerm& a, const CoreTerm& b);

// Number of AST nodes.
std::size_t term_size(const CoreTerm& t);

// Smallest k such that every Var index is < k + (enclosing binders); i.e.
// 0 for a closed term.
std::size_t free_index_bound(const CoreTerm& t);

struct Resolved {
    TermPtr term;
    std::set<NodeName> nodes;
};

// Replaces names by de Bruijn indices and desugars `let`. Throws
// ResolveError on an unbound identifier.
Resolved resolve(const SurfaceTerm& t);

// Parse and resolve in one go.
Resolved load_source(std::string_view text);

struct ClosednessViolation {
    std::vector<std::size_t> path;  // child indices from the root to the At node
    std::size_t index;              // escaping index, relative to the At body
};

std::vector<ClosednessViolation> check_closed_at(const CoreTerm& t);

std::string describe(const ClosednessViolation& v);

// Prints a core term as surface text, naming the binder at depth d `vd`.
std::string print_surface(const CoreTerm& t);

// Debug rendering of the de Bruijn form, e.g. `App(Lam(Var 0), Lit 3)`.
std::string show_core(const CoreTerm& t);

// Deterministic generator of closed terms with at most `size` AST nodes.
// Locus annotations only wrap closed subterms and name members of `nodes`.
TermPtr gen_term(std::uint64_t seed, std::size_t size, const std::vector<NodeName>& nodes);

}  // namespace dam

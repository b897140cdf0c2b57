#include "varsample/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace vs {

double to_double(const Rational& r) { return r.convert_to<double>(); }

Polynomial Polynomial::constant(int num_vars, const Rational& c) {
    Polynomial p(num_vars);
    p.add_term(Exponents(num_vars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int num_vars, int index) {
    Polynomial p(num_vars);
    Exponents a(num_vars, 0);
    a[index] = 1;
    p.add_term(a, 1);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [a, c] : terms_) {
        int s = 0;
        for (int e : a) s += e;
        d = std::max(d, s);
    }
    return d;
}

bool Polynomial::is_homogeneous() const {
    if (terms_.empty()) return true;
    int d = -1;
    for (const auto& [a, c] : terms_) {
        int s = 0;
        for (int e : a) s += e;
        if (d < 0) d = s;
        else if (s != d) return false;
    }
    return true;
}

void Polynomial::add_term(const Exponents& a, const Rational& c) {
    if (c == 0) return;
    auto it = terms_.find(a);
    if (it == terms_.end()) {
        terms_.emplace(a, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Rational Polynomial::coefficient(const Exponents& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? Rational(0) : it->second;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [a, c] : o.terms_) r.add_term(a, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [a, c] : o.terms_) r.add_term(a, -c);
    return r;
}

Polynomial Polynomial::negate() const {
    Polynomial r(num_vars_);
    for (const auto& [a, c] : terms_) r.terms_.emplace(a, -c);
    return r;
}

Polynomial Polynomial::scale(const Rational& s) const {
    Polynomial r(num_vars_);
    if (s == 0) return r;
    for (const auto& [a, c] : terms_) r.terms_.emplace(a, c * s);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r(num_vars_);
    Exponents sum(num_vars_);
    for (const auto& [a, ca] : terms_) {
        for (const auto& [b, cb] : o.terms_) {
            for (int i = 0; i < num_vars_; ++i) sum[i] = a[i] + b[i];
            r.add_term(sum, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::pow(unsigned e) const {
    Polynomial result = Polynomial::constant(num_vars_, 1);
    Polynomial base = *this;
    while (e > 0) {
        if (e & 1u) result = result * base;
        base = base * base;
        e >>= 1u;
    }
    return result;
}

Polynomial Polynomial::derivative(int var) const {
    Polynomial r(num_vars_);
    for (const auto& [a, c] : terms_) {
        if (a[var] == 0) continue;
        Exponents b = a;
        b[var] -= 1;
        r.add_term(b, c * a[var]);
    }
    return r;
}

std::complex<double> Polynomial::evaluate(const Eigen::VectorXcd& x) const {
    if (x.size() != num_vars_)
        throw input_error("evaluate: point dimension " + std::to_string(x.size()) +
                          " does not match num_vars " + std::to_string(num_vars_));
    std::complex<double> acc(0.0, 0.0);
    for (const auto& [a, c] : terms_) {
        std::complex<double> t(to_double(c), 0.0);
        for (int i = 0; i < num_vars_; ++i) {
            for (int k = 0; k < a[i]; ++k) t *= x[i];
        }
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::homogenize() const {
    int d = degree();
    Polynomial r(num_vars_ + 1);
    for (const auto& [a, c] : terms_) {
        Exponents b = a;
        int s = 0;
        for (int e : a) s += e;
        b.push_back(d - s);
        r.add_term(b, c);
    }
    return r;
}

Polynomial Polynomial::compose_linear(const std::vector<std::vector<Rational>>& M) const {
    if (static_cast<int>(M.size()) != num_vars_)
        throw input_error("compose_linear: matrix row count must equal num_vars");
    int m = num_vars_ == 0 ? 0 : static_cast<int>(M[0].size());
    // images of the variables as linear polynomials in the new ring
    std::vector<Polynomial> image;
    image.reserve(num_vars_);
    for (int i = 0; i < num_vars_; ++i) {
        Polynomial li(m);
        for (int j = 0; j < m; ++j) {
            Exponents a(m, 0);
            a[j] = 1;
            li.add_term(a, M[i][j]);
        }
        image.push_back(li);
    }
    Polynomial r(m);
    for (const auto& [a, c] : terms_) {
        Polynomial t = Polynomial::constant(m, c);
        for (int i = 0; i < num_vars_; ++i)
            if (a[i] > 0) t = t * image[i].pow(static_cast<unsigned>(a[i]));
        r = r + t;
    }
    return r;
}

Polynomial Polynomial::reindex(const std::vector<int>& where, int new_num_vars) const {
    Polynomial r(new_num_vars);
    for (const auto& [a, c] : terms_) {
        Exponents b(new_num_vars, 0);
        for (int i = 0; i < num_vars_; ++i) b[where[i]] = a[i];
        r.add_term(b, c);
    }
    return r;
}

Polynomial Polynomial::substitute(const std::vector<std::optional<Rational>>& values) const {
    Polynomial r(num_vars_);
    for (const auto& [a, c] : terms_) {
        Rational coeff = c;
        Exponents b = a;
        for (int i = 0; i < num_vars_; ++i) {
            if (values[i] && a[i] > 0) {
                Rational v = *values[i];
                for (int k = 0; k < a[i]; ++k) coeff *= v;
                b[i] = 0;
            }
        }
        r.add_term(b, coeff);
    }
    return r;
}

PolySystem::PolySystem(std::vector<Polynomial> polys, std::vector<std::string> var_names)
    : polys_(std::move(polys)), var_names_(std::move(var_names)) {
    for (const auto& p : polys_) {
        if (p.num_vars() != num_vars())
            throw input_error("PolySystem: all polynomials must share the variable ring");
    }
    if (codim() > num_vars())
        throw input_error("PolySystem: more equations than variables (codim > n)");
}

std::vector<int> PolySystem::degrees() const {
    std::vector<int> d;
    d.reserve(polys_.size());
    for (const auto& p : polys_) d.push_back(p.degree());
    return d;
}

int PolySystem::max_degree() const {
    int d = 0;
    for (const auto& p : polys_) d = std::max(d, p.degree());
    return d;
}

long long PolySystem::bezout_count() const {
    long long n = 1;
    for (const auto& p : polys_) {
        int d = std::max(1, p.degree());
        if (n > (1LL << 62) / d) return 1LL << 62;  // saturate
        n *= d;
    }
    return n;
}

Eigen::VectorXcd PolySystem::evaluate(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd v(size());
    for (int i = 0; i < size(); ++i) v[i] = polys_[i].evaluate(x);
    return v;
}

Eigen::MatrixXcd PolySystem::jacobian(const Eigen::VectorXcd& x) const {
    const auto& rows = jacobian_polys();
    Eigen::MatrixXcd J(size(), num_vars());
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < num_vars(); ++j) J(i, j) = rows[i][j].evaluate(x);
    return J;
}

Eigen::VectorXd PolySystem::evaluate_real(const Eigen::VectorXd& x) const {
    return evaluate(x.cast<std::complex<double>>()).real();
}

Eigen::MatrixXd PolySystem::jacobian_real(const Eigen::VectorXd& x) const {
    return jacobian(x.cast<std::complex<double>>()).real();
}

double PolySystem::residual(const Eigen::VectorXd& x) const {
    return evaluate_real(x).lpNorm<Eigen::Infinity>();
}

const std::vector<std::vector<Polynomial>>& PolySystem::jacobian_polys() const {
    std::call_once(jac_cache_->once, [this]() {
        auto& rows = jac_cache_->rows;
        rows.resize(polys_.size());
        for (std::size_t i = 0; i < polys_.size(); ++i) {
            rows[i].reserve(num_vars());
            for (int j = 0; j < num_vars(); ++j) rows[i].push_back(polys_[i].derivative(j));
        }
    });
    return jac_cache_->rows;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, line, col); }

    char peek() const { return pos < src.size() ? src[pos] : '\0'; }

    char advance() {
        char c = src[pos++];
        if (c == '\n') { ++line; col = 1; } else { ++col; }
        return c;
    }

    void skip_space() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\r'))
            advance();
    }
};

// Pass 1 collects variable names; pass 2 builds polynomials against the
// final name -> index table.
struct Parser {
    Lexer lex;
    const std::map<std::string, int>* vars = nullptr;  // null during collection
    std::vector<std::string>* collected = nullptr;
    int num_vars = 0;

    explicit Parser(const std::string& s) : lex(s) {}

    bool at_separator() {
        char c = lex.peek();
        return c == ';' || c == '\n' || c == '\0';
    }

    Polynomial parse_expr() {
        Polynomial acc = parse_term();
        for (;;) {
            lex.skip_space();
            char c = lex.peek();
            if (c == '+') { lex.advance(); acc = acc + parse_term(); }
            else if (c == '-') { lex.advance(); acc = acc - parse_term(); }
            else break;
        }
        return acc;
    }

    Polynomial parse_term() {
        Polynomial acc = parse_factor();
        for (;;) {
            lex.skip_space();
            char c = lex.peek();
            if (c == '*') {
                lex.advance();
                acc = acc * parse_factor();
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
                       std::isdigit(static_cast<unsigned char>(c)) || c == '(') {
                lex.fail("implicit multiplication is not allowed; use '*'");
            } else {
                break;
            }
        }
        return acc;
    }

    Polynomial parse_factor() {
        Polynomial base = parse_base();
        lex.skip_space();
        if (lex.peek() == '^') {
            lex.advance();
            lex.skip_space();
            if (!std::isdigit(static_cast<unsigned char>(lex.peek())))
                lex.fail("expected a nonnegative integer exponent after '^'");
            unsigned e = 0;
            while (std::isdigit(static_cast<unsigned char>(lex.peek()))) {
                e = e * 10 + static_cast<unsigned>(lex.advance() - '0');
                if (e > 1000) lex.fail("exponent too large");
            }
            return base.pow(e);
        }
        return base;
    }

    Polynomial parse_base() {
        lex.skip_space();
        char c = lex.peek();
        if (c == '-') { lex.advance(); return parse_factor().negate(); }
        if (c == '+') { lex.advance(); return parse_factor(); }
        if (c == '(') {
            lex.advance();
            Polynomial inner = parse_expr();
            lex.skip_space();
            if (lex.peek() != ')') lex.fail("expected ')'");
            lex.advance();
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_variable();
        lex.fail(std::string("unexpected character '") + c + "'");
    }

    Polynomial parse_number() {
        std::string digits;
        while (std::isdigit(static_cast<unsigned char>(lex.peek()))) digits += lex.advance();
        Rational value;
        if (lex.peek() == '.') {
            lex.advance();
            std::string frac;
            while (std::isdigit(static_cast<unsigned char>(lex.peek()))) frac += lex.advance();
            if (digits.empty() && frac.empty()) lex.fail("malformed decimal literal");
            BigInt num(digits.empty() ? "0" : digits);
            BigInt den = 1;
            for (char d : frac) {
                num = num * 10 + (d - '0');
                den *= 10;
            }
            value = Rational(num, den);
        } else if (lex.peek() == '/') {
            lex.advance();
            std::string denom;
            while (std::isdigit(static_cast<unsigned char>(lex.peek()))) denom += lex.advance();
            if (denom.empty()) lex.fail("expected an integer denominator after '/'");
            BigInt den(denom);
            if (den == 0) lex.fail("zero denominator");
            value = Rational(BigInt(digits), den);
        } else {
            if (digits.empty()) lex.fail("malformed numeric literal");
            value = Rational(BigInt(digits));
        }
        return Polynomial::constant(num_vars, value);
    }

    Polynomial parse_variable() {
        int line = lex.line, col = lex.col;
        std::string name;
        while (std::isalnum(static_cast<unsigned char>(lex.peek())) || lex.peek() == '_')
            name += lex.advance();
        if (collected) {
            if (std::find(collected->begin(), collected->end(), name) == collected->end())
                collected->push_back(name);
            return Polynomial(num_vars);  // placeholder during collection
        }
        auto it = vars->find(name);
        if (it == vars->end())
            throw parse_error("unknown variable '" + name + "'", line, col);
        return Polynomial::variable(num_vars, it->second);
    }

    // Parses the full source into a list of polynomials.
    std::vector<Polynomial> parse_all() {
        std::vector<Polynomial> out;
        for (;;) {
            lex.skip_space();
            while (lex.peek() == ';' || lex.peek() == '\n') {
                lex.advance();
                lex.skip_space();
            }
            if (lex.peek() == '\0') break;
            out.push_back(parse_expr());
            lex.skip_space();
            if (!at_separator())
                lex.fail(std::string("unexpected character '") + lex.peek() + "'");
        }
        return out;
    }
};

}  // namespace

PolySystem parse_system(const std::string& text,
                        std::optional<std::vector<std::string>> var_order) {
    std::vector<std::string> names;
    if (var_order) {
        names = *var_order;
    } else {
        Parser collector(text);
        std::vector<std::string> seen;
        collector.collected = &seen;
        collector.parse_all();
        names = seen;
        std::sort(names.begin(), names.end());
    }
    std::map<std::string, int> table;
    for (std::size_t i = 0; i < names.size(); ++i) table[names[i]] = static_cast<int>(i);

    Parser parser(text);
    parser.vars = &table;
    parser.num_vars = static_cast<int>(names.size());
    std::vector<Polynomial> polys = parser.parse_all();
    if (polys.empty()) throw input_error("empty input: no polynomials found");
    return PolySystem(std::move(polys), std::move(names));
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

// Exact decimal string when the denominator is 2^a 5^b, else "p/q".
std::string coeff_string(const Rational& c) {
    BigInt num = boost::multiprecision::numerator(c);
    BigInt den = boost::multiprecision::denominator(c);
    if (den == 1) return num.str();
    BigInt d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return num.str() + "/" + den.str();
    int shift = std::max(twos, fives);
    BigInt scaled = num;
    for (int i = 0; i < shift - twos; ++i) scaled *= 2;
    for (int i = 0; i < shift - fives; ++i) scaled *= 5;
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string digits = scaled.str();
    if (static_cast<int>(digits.size()) <= shift)
        digits = std::string(shift - digits.size() + 1, '0') + digits;
    digits.insert(digits.size() - shift, ".");
    return (neg ? "-" : "") + digits;
}

int total_degree(const Exponents& a) {
    int s = 0;
    for (int e : a) s += e;
    return s;
}

}  // namespace

std::string print_polynomial(const Polynomial& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    // graded-lex: degree descending, then exponent tuple lexicographically descending
    std::vector<const std::pair<const Exponents, Rational>*> order;
    for (const auto& t : p.terms()) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        int da = total_degree(a->first), db = total_degree(b->first);
        if (da != db) return da > db;
        return a->first > b->first;
    });

    std::ostringstream out;
    bool first = true;
    for (const auto* t : order) {
        Rational c = t->second;
        bool neg = c < 0;
        if (first) {
            if (neg) out << "-";
            first = false;
        } else {
            out << (neg ? " - " : " + ");
        }
        Rational mag = neg ? Rational(-c) : c;
        std::string vars;
        for (std::size_t i = 0; i < t->first.size(); ++i) {
            int e = t->first[i];
            if (e == 0) continue;
            if (!vars.empty()) vars += "*";
            vars += names[i];
            if (e > 1) vars += "^" + std::to_string(e);
        }
        if (vars.empty()) {
            out << coeff_string(mag);
        } else if (mag == 1) {
            out << vars;
        } else {
            out << coeff_string(mag) << "*" << vars;
        }
    }
    return out.str();
}

std::string print_system(const PolySystem& F) {
    std::ostringstream out;
    for (int i = 0; i < F.size(); ++i) {
        if (i) out << ";\n";
        out << print_polynomial(F.poly(i), F.var_names());
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Weil norm
// ---------------------------------------------------------------------------

namespace {

BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

double weil_norm(const Polynomial& h) {
    if (!h.is_homogeneous())
        throw input_error("weil_norm: polynomial is not homogeneous");
    if (h.is_zero()) return 0.0;
    int d = h.degree();
    BigInt dfact = factorial(d);
    Rational sum = 0;
    for (const auto& [a, c] : h.terms()) {
        // binom(d, a)^{-1} = a_1! ... a_n! / d!
        BigInt prod = 1;
        for (int e : a) prod *= factorial(e);
        sum += c * c * Rational(prod, dfact);
    }
    return std::sqrt(to_double(sum));
}

double weil_norm(const std::vector<Polynomial>& fs) {
    double s = 0.0;
    for (const auto& f : fs) {
        double w = weil_norm(f);
        s += w * w;
    }
    return std::sqrt(s);
}

}  // namespace vs

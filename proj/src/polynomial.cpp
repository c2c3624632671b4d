#include "slitkit/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace slitkit {
namespace {

void check_dim(int n) {
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("polynomial dimension must be 1 or 2");
}

template <class T>
T ipow(const T& base, int e) {
    T out(1);
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

}  // namespace

XRPolynomial::XRPolynomial(int n) : n_(n) { check_dim(n); }

XRPolynomial XRPolynomial::constant(int n, const Rational& c) {
    return monomial(n, Monomial{}, c);
}

XRPolynomial XRPolynomial::monomial(int n, const Monomial& mono, const Rational& c) {
    XRPolynomial p(n);
    p.set(mono, c);
    return p;
}

XRPolynomial XRPolynomial::x(int n, int i) {
    if (i < 0 || i >= n) throw std::out_of_range("x index out of range");
    Monomial mono;
    mono.mu[i] = 1;
    return monomial(n, mono);
}

XRPolynomial XRPolynomial::r(int n) { return monomial(n, Monomial{{0, 0}, 1}); }

Rational XRPolynomial::coeff(const Monomial& mono) const {
    auto it = terms_.find(mono);
    return it == terms_.end() ? Rational(0) : it->second;
}

void XRPolynomial::set(const Monomial& mono, const Rational& c) {
    for (int i = n_; i < kMaxDim; ++i)
        if (mono.mu[i] != 0) throw std::invalid_argument("monomial uses a variable beyond dimension");
    if (mono.m < 0 || mono.mu[0] < 0 || mono.mu[1] < 0)
        throw std::invalid_argument("negative exponent");
    if (c == 0) terms_.erase(mono);
    else terms_[mono] = c;
}

void XRPolynomial::add(const Monomial& mono, const Rational& c) {
    if (c == 0) return;
    set(mono, coeff(mono) + c);
}

int XRPolynomial::degree() const {
    int deg = -1;
    for (const auto& [mono, c] : terms_) deg = std::max(deg, mono.degree());
    return deg;
}

int XRPolynomial::r_degree() const {
    int deg = -1;
    for (const auto& [mono, c] : terms_) deg = std::max(deg, mono.m);
    return deg;
}

Rational XRPolynomial::norm() const {
    Rational best = 0;
    for (const auto& [mono, c] : terms_) best = std::max(best, slitkit::abs(c));
    return best;
}

XRPolynomial XRPolynomial::truncated(int max_degree) const {
    XRPolynomial out(n_);
    for (const auto& [mono, c] : terms_)
        if (mono.degree() <= max_degree) out.terms_.emplace(mono, c);
    return out;
}

XRPolynomial XRPolynomial::homogeneous_part(int degree) const {
    XRPolynomial out(n_);
    for (const auto& [mono, c] : terms_)
        if (mono.degree() == degree) out.terms_.emplace(mono, c);
    return out;
}

XRPolynomial XRPolynomial::dx(int i) const {
    XRPolynomial out(n_);
    for (const auto& [mono, c] : terms_) {
        if (mono.mu[i] == 0) continue;
        Monomial lowered = mono;
        --lowered.mu[i];
        out.add(lowered, c * mono.mu[i]);
    }
    return out;
}

XRPolynomial XRPolynomial::dr() const {
    XRPolynomial out(n_);
    for (const auto& [mono, c] : terms_) {
        if (mono.m == 0) continue;
        Monomial lowered = mono;
        --lowered.m;
        out.add(lowered, c * mono.m);
    }
    return out;
}

XRPolynomial XRPolynomial::at_r_zero() const {
    XRPolynomial out(n_);
    for (const auto& [mono, c] : terms_)
        if (mono.m == 0) out.terms_.emplace(mono, c);
    return out;
}

double XRPolynomial::evaluate(std::span<const double> x, double r) const {
    double sum = 0.0;
    for (const auto& [mono, c] : terms_) {
        double term = static_cast<double>(c);
        for (int i = 0; i < n_; ++i) term *= ipow(x[i], mono.mu[i]);
        sum += term * ipow(r, mono.m);
    }
    return sum;
}

Rational XRPolynomial::evaluate(std::span<const Rational> x, const Rational& r) const {
    Rational sum = 0;
    for (const auto& [mono, c] : terms_) {
        Rational term = c;
        for (int i = 0; i < n_; ++i) term *= ipow(x[i], mono.mu[i]);
        sum += term * ipow(r, mono.m);
    }
    return sum;
}

XRPolynomial& XRPolynomial::operator+=(const XRPolynomial& other) {
    if (other.n_ != n_) throw std::invalid_argument("dimension mismatch");
    for (const auto& [mono, c] : other.terms_) add(mono, c);
    return *this;
}

XRPolynomial& XRPolynomial::operator-=(const XRPolynomial& other) {
    if (other.n_ != n_) throw std::invalid_argument("dimension mismatch");
    for (const auto& [mono, c] : other.terms_) add(mono, -c);
    return *this;
}

XRPolynomial& XRPolynomial::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [mono, value] : terms_) value *= c;
    return *this;
}

XRPolynomial XRPolynomial::multiply_truncated(const XRPolynomial& a, const XRPolynomial& b,
                                              int max_degree) {
    if (a.n_ != b.n_) throw std::invalid_argument("dimension mismatch");
    XRPolynomial out(a.n_);
    for (const auto& [ma, ca] : a.terms_) {
        if (ma.degree() > max_degree) continue;
        for (const auto& [mb, cb] : b.terms_) {
            if (ma.degree() + mb.degree() > max_degree) continue;
            Monomial prod{{ma.mu[0] + mb.mu[0], ma.mu[1] + mb.mu[1]}, ma.m + mb.m};
            out.add(prod, ca * cb);
        }
    }
    return out;
}

XRPolynomial operator*(const XRPolynomial& a, const XRPolynomial& b) {
    const int deg = std::max(a.degree(), 0) + std::max(b.degree(), 0);
    return XRPolynomial::multiply_truncated(a, b, deg);
}

std::string XRPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // print by ascending degree for readability
    std::vector<std::pair<Monomial, Rational>> sorted(terms_.begin(), terms_.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
        return l.first.degree() < r.first.degree();
    });
    for (const auto& [mono, c] : sorted) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        const Rational mag = slitkit::abs(c);
        const bool unit = mag == 1 && mono.degree() > 0;
        if (!unit) os << slitkit::to_string(mag);
        bool need_star = !unit;
        for (int i = 0; i < n_; ++i) {
            if (mono.mu[i] == 0) continue;
            os << (need_star ? "*" : "") << "x" << (i + 1);
            if (mono.mu[i] > 1) os << "^" << mono.mu[i];
            need_star = true;
        }
        if (mono.m > 0) {
            os << (need_star ? "*" : "") << "r";
            if (mono.m > 1) os << "^" << mono.m;
        }
    }
    return os.str();
}

std::string to_csv(const XRPolynomial& p) {
    std::ostringstream os;
    for (const auto& [mono, c] : p.terms()) {
        for (int i = 0; i < p.dim(); ++i) os << mono.mu[i] << ',';
        os << mono.m << ',' << boost::multiprecision::numerator(c) << ','
           << boost::multiprecision::denominator(c) << '\n';
    }
    return os.str();
}

XRPolynomial xrpoly_from_csv(int n, const std::string& text) {
    XRPolynomial p(n);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (static_cast<int>(fields.size()) != n + 3)
            throw std::invalid_argument("polynomial CSV row needs n+3 fields: '" + line + "'");
        Monomial mono;
        for (int i = 0; i < n; ++i) mono.mu[i] = std::stoi(fields[i]);
        mono.m = std::stoi(fields[n]);
        const Rational c = parse_rational(fields[n + 1] + "/" + fields[n + 2]);
        p.add(mono, c);
    }
    return p;
}

Polynomial1D::Polynomial1D(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Polynomial1D::operator()(const Rational& t) const {
    Rational acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc;
}

double Polynomial1D::derivative_value(double t, int j) const {
    double acc = 0.0;
    for (int p = degree(); p >= j; --p) {
        double factor = static_cast<double>(coeffs_[p]);
        for (int q = 0; q < j; ++q) factor *= (p - q);
        acc = acc * t + factor;
    }
    return acc;
}

Polynomial1D Polynomial1D::derivative() const {
    std::vector<Rational> out;
    for (int p = 1; p <= degree(); ++p) out.push_back(coeffs_[p] * p);
    return Polynomial1D(std::move(out));
}

Polynomial1D Polynomial1D::shifted(const Rational& t0) const {
    // Taylor shift by repeated synthetic division
    std::vector<Rational> c = coeffs_;
    const int deg = degree();
    for (int i = 0; i < deg; ++i)
        for (int j = deg - 1; j >= i; --j) c[j] += t0 * c[j + 1];
    return Polynomial1D(std::move(c));
}

}  // namespace slitkit

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace pairex {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Raised on bad inputs (shape, grid, symmetry) so callers can map it to a config error.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a computation leaves its validity range (PSD failure, blow-up, truncation).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Grid {
    int n = 2;
    double x_min = 0.0;
    double dx = 1.0;
    bool periodic = true;

    double x(int i) const { return x_min + i * dx; }
    double length() const { return n * dx; }
    void validate() const;

    // n points spanning [-L/2, L/2).
    static Grid centered(int n, double length, bool periodic = true);

    bool operator==(const Grid& o) const {
        return n == o.n && x_min == o.x_min && dx == o.dx && periodic == o.periodic;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct Field {
    Grid grid;
    CVec values;

    Field() = default;
    Field(const Grid& g, CVec v);
    static Field zero(const Grid& g) { return Field(g, CVec::Zero(g.n)); }

    double norm() const;
};

enum class Symmetry { General, Symmetric, Hermitian };

const char* to_string(Symmetry s);

// Two-point kernel k(x_i, x_j). Operators act by composition with weight dx,
// so the matrix that multiplies vectors is op() = entries * dx.
class Kernel {
public:
    Grid grid;
    CMat entries;
    Symmetry symmetry = Symmetry::General;

    Kernel() = default;
    Kernel(const Grid& g, CMat e);
    Kernel(const Grid& g, CMat e, Symmetry s);

    static Kernel zero(const Grid& g);
    static Kernel identity(const Grid& g);
    static Kernel from_op(const Grid& g, const CMat& op);

    CMat op() const { return entries * grid.dx; }
    double max_abs() const;

    // Strictest tag the entries satisfy at relative tolerance 1e-12.
    static Symmetry detect(const CMat& e);
    // Throws InputError when the stored tag is violated.
    void check_tag() const;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

cd inner_product(const Field& f, const Field& g);
Kernel kernel_compose(const Kernel& a, const Kernel& b);
double hs_norm(const Kernel& a);
double operator_norm(const Kernel& a);
// int k(x, x) dx
cd kernel_trace(const Kernel& a);
Kernel adjoint(const Kernel& a);
Kernel transpose(const Kernel& a);
Kernel conjugate(const Kernel& a);

Kernel operator+(const Kernel& a, const Kernel& b);
Kernel operator-(const Kernel& a, const Kernel& b);
Kernel operator*(cd s, const Kernel& a);

enum class PotentialKind { Cutoff, Gaussian, Delta, Zero };

PotentialKind potential_kind_from_string(const std::string& s);
const char* to_string(PotentialKind k);

struct PotentialParams {
    PotentialKind kind = PotentialKind::Cutoff;
    double strength = 1.0;
    // cutoff radius R for Cutoff, width sigma for Gaussian
    double cutoff = 2.0;
    double eps = 0.5;
    bool defocusing = true;
};

// v(x_i - x_j) and its radial derivative. Distances use the minimum image on periodic grids.
struct Potential {
    Grid grid;
    PotentialParams params;
    RMat v;
    RMat r;
    RMat dv;

    static Potential build(const Grid& g, const PotentialParams& p);

    double profile(double r) const;
    double dprofile(double r) const;
    // (v + r v') as a matrix, for the E_cc remainder.
    RMat v_plus_rdv() const;
};

}  // namespace pairex

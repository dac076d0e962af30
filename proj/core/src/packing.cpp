#include "gics/packing.hpp"

#include <cmath>
#include <numbers>

#include "gics/error.hpp"

namespace gics {

HermitianPacking::HermitianPacking(Eigen::Index n) : n_(n) {
    if (n < 1) throw ShapeError("packing dimension must be positive");
}

HermitianPacking::Slot HermitianPacking::slot(Eigen::Index k) const {
    const auto [i, j] = pair(k);
    if (i == j) return Slot::Diagonal;
    return i < j ? Slot::Upper : Slot::Lower;
}

Eigen::VectorXd HermitianPacking::pack(const Eigen::MatrixXcd& B) const {
    if (B.rows() != n_ || B.cols() != n_) throw ShapeError("matrix does not match packing dimension");
    Eigen::VectorXd x(size());
    for (Eigen::Index i = 0; i < n_; ++i) {
        x(flat(i, i)) = B(i, i).real();
        for (Eigen::Index j = i + 1; j < n_; ++j) {
            x(flat(i, j)) = B(i, j).real();
            x(flat(j, i)) = B(i, j).imag();
        }
    }
    return x;
}

Eigen::MatrixXcd HermitianPacking::unpack(const Eigen::VectorXd& x) const {
    if (x.size() != size()) throw ShapeError("packed vector length " + std::to_string(x.size()) + " != n^2");
    Eigen::MatrixXcd B(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
        B(i, i) = x(flat(i, i));
        for (Eigen::Index j = i + 1; j < n_; ++j) {
            B(i, j) = std::complex<double>(x(flat(i, j)), x(flat(j, i)));
            B(j, i) = std::conj(B(i, j));
        }
    }
    return B;
}

Eigen::MatrixXcd complex_sensing_row(const Eigen::VectorXcd& e_r, const Eigen::VectorXd& r1, double wavelength,
                                     double d22) {
    if (e_r.size() != r1.size()) throw ShapeError("reference field and r1 axis differ in length");
    const double ld = wavelength * d22;
    Eigen::VectorXcd c(e_r.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = e_r(i) * std::polar(1.0, std::numbers::pi * r1(i) * r1(i) / ld);
    Eigen::MatrixXcd A = c.conjugate() * c.transpose();
    // Enforce exact Hermitian symmetry against rounding in the product.
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        A(i, i) = std::norm(e_r(i));
        for (Eigen::Index j = i + 1; j < c.size(); ++j) A(j, i) = std::conj(A(i, j));
    }
    return A;
}

double hermitian_defect(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols()) throw ShapeError("matrix is not square");
    const double scale = A.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (A - A.adjoint()).cwiseAbs().maxCoeff() / scale;
}

Eigen::VectorXd pack_row(const Eigen::MatrixXcd& A, const Eigen::VectorXd& i_r, DiagonalConvention convention) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || i_r.size() != n) throw ShapeError("pack_row: A must be n x n and i_r length n");
    if (hermitian_defect(A) > 1e-10) throw ConsistencyError("pack_row: sensing matrix is not Hermitian");

    Eigen::VectorXd row(n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (convention == DiagonalConvention::ExactIntensity) {
            row(i * n + i) = A(i, i).real();
        } else {
            if (i_r(i) < 0.0) throw DataError("pack_row: negative reference intensity");
            row(i * n + i) = std::sqrt(i_r(i));
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            row(i * n + j) = 2.0 * A(i, j).real();
            row(j * n + i) = -2.0 * A(i, j).imag();
        }
    }
    return row;
}

Eigen::MatrixXcd outer_spectrum(const Eigen::VectorXcd& T) { return T.conjugate() * T.transpose(); }

}  // namespace gics

#pragma once

#include <utility>

#include <Eigen/Dense>

namespace gics {

enum class DiagonalConvention { ExactIntensity, PaperSqrt };

// Real packing of an n x n Hermitian matrix into n^2 slots, flat index i*n + j.
// Diagonal slot (i,i) holds the real diagonal, upper slot (i,j), i<j, the real
// part of entry (i,j), and lower slot (j,i) the imaginary part of entry (i,j).
class HermitianPacking {
public:
    enum class Slot { Diagonal, Upper, Lower };

    explicit HermitianPacking(Eigen::Index n);

    Eigen::Index n() const { return n_; }
    Eigen::Index size() const { return n_ * n_; }
    Eigen::Index flat(Eigen::Index i, Eigen::Index j) const { return i * n_ + j; }
    std::pair<Eigen::Index, Eigen::Index> pair(Eigen::Index k) const { return {k / n_, k % n_}; }
    Slot slot(Eigen::Index k) const;

    Eigen::VectorXd pack(const Eigen::MatrixXcd& B) const;
    Eigen::MatrixXcd unpack(const Eigen::VectorXd& x) const;

private:
    Eigen::Index n_;
};

// A(i,j) = conj(e_i) e_j exp(-i pi (r1_i^2 - r1_j^2) / (lambda d22)).
Eigen::MatrixXcd complex_sensing_row(const Eigen::VectorXcd& e_r, const Eigen::VectorXd& r1, double wavelength,
                                     double d22);

// Packs a Hermitian row matrix. Off-diagonal slots: 2 Re A(i,j) upper,
// -2 Im A(i,j) lower. Diagonal: Re A(i,i) (ExactIntensity) or sqrt(i_r)
// (PaperSqrt). Throws ConsistencyError when A is not Hermitian.
Eigen::VectorXd pack_row(const Eigen::MatrixXcd& A, const Eigen::VectorXd& i_r, DiagonalConvention convention);

// Max |A - A^H| relative to max |A| (0 for the zero matrix).
double hermitian_defect(const Eigen::MatrixXcd& A);

// B(i,j) = conj(T_i) T_j.
Eigen::MatrixXcd outer_spectrum(const Eigen::VectorXcd& T);

}  // namespace gics

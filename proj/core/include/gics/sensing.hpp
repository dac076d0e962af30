#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gics/packing.hpp"
#include "gics/scheme.hpp"

namespace gics {

enum class PhaseStrategy { ZeroPhase, SphericalWave, SeededRandomPhase };

struct SensingMode {
    enum class Kind { Homodyne, PhaseConjecture, DiagonalOnly };

    Kind kind = Kind::Homodyne;
    PhaseStrategy strategy = PhaseStrategy::ZeroPhase;
    DiagonalConvention convention = DiagonalConvention::ExactIntensity;
    // Seed of the SeededRandomPhase profile. One profile is drawn per system
    // and shared by every shot.
    std::uint64_t conjecture_seed = 7;

    bool full() const { return kind != Kind::DiagonalOnly; }
    std::string name() const;  // "homodyne", "conjecture-zero", ..., "diagonal"
    static SensingMode parse(const std::string& name);
};

std::string to_string(PhaseStrategy s);
std::string to_string(DiagonalConvention c);
PhaseStrategy parse_strategy(const std::string& s);
DiagonalConvention parse_convention(const std::string& s);

// sqrt(i_r) exp(i phi) with phi = 0, -pi r1^2/(lambda d1) (the curvature a
// point source at S leaves on D1 under this kernel sign) or seeded uniform.
Eigen::VectorXcd conjecture_field(const Eigen::VectorXd& i_r, const SchemeGeometry& geometry, PhaseStrategy strategy,
                                  std::uint64_t seed = 7);

// Integer alignment of several r2 pixels onto the D1 pitch. The reference is
// the pixel with the median offset; its n frequencies form the window that
// reports are cropped to.
struct R2Alignment {
    std::vector<Eigen::Index> pixels;
    std::vector<Eigen::Index> shift;  // in D1 pitches, relative to the reference
    Eigen::Index reference_pixel = 0;
    Eigen::Index union_size = 0;
    Eigen::Index window_offset = 0;
    Eigen::VectorXd freq_axis;        // union grid, cycles/m

    // Union index of D1 pixel 0 for pixels[k].
    Eigen::Index union_start(std::size_t k) const { return window_offset - shift[k]; }
};

// Empty pixel list selects the central D2 pixel. Throws AlignmentError when
// pixels are not an integer number of D1 pitches apart.
R2Alignment align_r2(const SchemeGeometry& geometry, std::vector<Eigen::Index> r2_pixels);

struct RowOrigin {
    std::int64_t shot_index = 0;
    Eigen::Index r2_pixel = 0;
};

// Row-normalised real system A' x = y in factored form. Every full-mode row is
// the packing of g g^H-type rank-one matrices: for row k, with generator g_k
// on the union frequency grid,
//   off-diagonal slot values: 2 Re(conj g_ki g_kj), -2 Im(conj g_ki g_kj)
//   diagonal slot values:     diag(k, i)
// Diagonal-only systems keep just the diagonal coefficients.
class SensingSystem {
public:
    SensingMode mode;
    Eigen::MatrixXcd generators;  // rows x n (empty for diagonal-only)
    Eigen::MatrixXd diagonal;     // rows x n
    Eigen::VectorXd y;            // rows
    Eigen::VectorXd row_scale;    // factor each raw row and y entry was multiplied by
    Eigen::VectorXd freq_axis;    // n union frequencies, cycles/m
    Eigen::Index detector_pixels = 0;  // D1 pixel count
    Eigen::Index window_offset = 0;    // union index of the reference r2's first frequency
    Eigen::Index r2_pixel = 0;         // reference r2 pixel
    std::vector<RowOrigin> origins;

    Eigen::Index rows() const { return y.size(); }
    Eigen::Index n() const { return freq_axis.size(); }
    Eigen::Index cols() const { return mode.full() ? n() * n() : n(); }
    HermitianPacking packing() const { return HermitianPacking(n()); }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd adjoint(const Eigen::VectorXd& r) const;
    // Explicit columns of A' for the given flat indices.
    Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const;
    Eigen::VectorXd row(Eigen::Index k) const;
    Eigen::MatrixXd a_prime() const;  // dense rows x cols, small systems only

    SensingSystem select_rows(const std::vector<Eigen::Index>& rows) const;
    void check() const;
};

// Builds one row per (shot, r2) pair. r2 pixels must sit an integer number of
// D1 pitches apart; the unknown lives on the union frequency grid. An empty
// r2 list selects the central D2 pixel.
SensingSystem build_system(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry,
                           const SensingMode& mode, std::vector<Eigen::Index> r2_pixels = {});

}  // namespace gics

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gics/scheme.hpp"
#include "gics/sensing.hpp"
#include "gics/solver.hpp"

namespace gics {

// Container layout (all integers little-endian):
//   8 bytes  magic ("GICSSYS\0", "GICSSHOT" or "GICSSOL\0")
//   uint32   format version (1)
//   uint64   header length in bytes
//   header   UTF-8 JSON; "payload" lists the arrays in file order
//   payload  float64 arrays, row-major, complex as (re, im) pairs
// See docs/formats.md.
inline constexpr std::uint32_t kFormatVersion = 1;

struct ShotBatch {
    std::vector<ShotRecord> shots;
    std::uint64_t seed = 0;
    Eigen::Index d1_pixels = 0;
    Eigen::Index d2_pixels = 0;
};

void save_system(const std::string& path, const SensingSystem& system, std::uint64_t seed);
SensingSystem load_system(const std::string& path, std::uint64_t* seed = nullptr);

void save_shots(const std::string& path, const ShotBatch& batch);
ShotBatch load_shots(const std::string& path);

void save_solution(const std::string& path, const SolveResult& result, const SensingSystem& system);
SolveResult load_solution(const std::string& path);

}  // namespace gics

#pragma once

#include "ml4c/rng.hpp"
#include "ml4c/synth.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace ml4c::testing {

/// Random DAG with d in [d_lo, d_hi] and about sparsity * d edges.
inline Dag random_dag(Rng& rng, int d_lo, int d_hi, double s_lo = 1.2, double s_hi = 1.7) {
    const int d = static_cast<int>(rng.uniform_int(d_lo, d_hi));
    const double s = rng.uniform(s_lo, s_hi);
    const int max_edges = d * (d - 1) / 2;
    const int m = std::min(max_edges, static_cast<int>(std::lround(s * d)));
    return gen_dag(d, m, rng.uniform01() < 0.5 ? GraphModel::ER : GraphModel::SF, rng);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("ml4c_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace ml4c::testing

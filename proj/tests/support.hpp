#pragma once

#include "glnar/series.hpp"
#include "glnar/simulator.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace glnar::test {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("glnar-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
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

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline ThetaState theta2(double phi1, double phi2, double sigma2, double nu)
{
    return {Eigen::Vector2d(phi1, phi2), sigma2, nu};
}

inline Simulation simulate_ar2(const ThetaState& theta, std::size_t n, std::uint64_t seed)
{
    SimSpec spec;
    spec.theta = theta;
    spec.n = n;
    spec.seed = seed;
    return simulate(spec);
}

inline Timestamp ts(const char* text) { return *parse_timestamp(text); }

} // namespace glnar::test

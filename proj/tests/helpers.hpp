#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "segsweep/model.hpp"

namespace segsweep::testing {

// Scan whose sections sit at `positions`, all reviewed.
inline ScanRecord make_scan(const std::vector<double>& positions, double spacing = 1.0, int rows = 4, int cols = 4,
                            const std::string& id = "s1", const std::string& patient = "p1") {
    ScanRecord s;
    s.scan_id = id;
    s.patient_id = patient;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        s.sections.push_back({static_cast<int>(k), positions[k], spacing, rows, cols});
        s.reviewed_indices.push_back(static_cast<int>(k));
    }
    return s;
}

inline ProbabilityRaster uniform_raster(const ScanRecord& scan, float value) {
    ProbabilityRaster r{scan.scan_id, scan.reviewed_indices, {}};
    for (int idx : scan.reviewed_indices) r.grids.emplace_back(scan.section(idx).rows, scan.section(idx).cols, value);
    return r;
}

inline ReferenceMask uniform_mask(const ScanRecord& scan, std::uint8_t value) {
    ReferenceMask m{scan.scan_id, scan.reviewed_indices, {}};
    for (int idx : scan.reviewed_indices) m.grids.emplace_back(scan.section(idx).rows, scan.section(idx).cols, value);
    return m;
}

inline MaskGrid random_mask(std::mt19937_64& rng, int rows, int cols, double density) {
    MaskGrid g(rows, cols);
    std::bernoulli_distribution on(density);
    for (auto& v : g.values) v = on(rng) ? 1 : 0;
    return g;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("segsweep-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace segsweep::testing

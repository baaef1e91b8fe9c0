#include "segsweep/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "segsweep/error.hpp"
#include "segsweep/raster_io.hpp"

namespace segsweep {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + "." + key + ": missing field");
    return *it;
}

int get_int(const json& obj, const char* key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected integer");
    return v.get<int>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected number");
    return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_string()) throw ParseError(where + "." + key + ": expected string");
    return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_array()) throw ParseError(where + "." + key + ": expected array");
    return v;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ManifestEntry parse_entry(const json& j, const std::string& where) {
    ManifestEntry e;
    auto& s = e.scan;
    s.scan_id = get_string(j, "scan_id", where);
    s.patient_id = get_string(j, "patient_id", where);

    const auto& sections = get_array(j, "sections", where);
    for (std::size_t k = 0; k < sections.size(); ++k) {
        const std::string w = where + ".sections[" + std::to_string(k) + "]";
        s.sections.push_back({get_int(sections[k], "index", w), get_number(sections[k], "table_position_mm", w),
                              get_number(sections[k], "pixel_spacing_mm", w), get_int(sections[k], "rows", w),
                              get_int(sections[k], "cols", w)});
    }

    const auto& reviewed = get_array(j, "reviewed_indices", where);
    for (std::size_t k = 0; k < reviewed.size(); ++k) {
        if (!reviewed[k].is_number_integer())
            throw ParseError(where + ".reviewed_indices[" + std::to_string(k) + "]: expected integer");
        s.reviewed_indices.push_back(reviewed[k].get<int>());
    }

    if (auto it = j.find("subset_range"); it != j.end() && !it->is_null()) {
        const std::string w = where + ".subset_range";
        s.subset_range = SubsetRange{get_int(*it, "superior", w), get_int(*it, "inferior", w)};
    }

    e.prob_path = get_string(j, "prob_path", where);
    e.ref_path = get_string(j, "ref_path", where);
    return e;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::filesystem::path DatasetManifest::resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

std::vector<std::string> DatasetManifest::patient_ids() const {
    std::set<std::string> ids;
    for (const auto& e : scans) ids.insert(e.scan.patient_id);
    return {ids.begin(), ids.end()};
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte);
        throw ParseError("manifest line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }

    DatasetManifest m;
    m.base_dir = base_dir;
    const auto& scans = get_array(doc, "scans", "manifest");
    std::set<std::string> ids;
    for (std::size_t k = 0; k < scans.size(); ++k) {
        auto entry = parse_entry(scans[k], "scans[" + std::to_string(k) + "]");
        if (!ids.insert(entry.scan.scan_id).second)
            throw ValidationError("duplicate scan_id '" + entry.scan.scan_id + "'");
        check_scan_record(entry.scan);
        m.scans.push_back(std::move(entry));
    }
    return m;
}

void check_raster_headers(const DatasetManifest& manifest, const ManifestEntry& entry) {
    const auto& scan = entry.scan;
    auto check = [&](const std::string& rel, RasterDtype want) {
        const auto path = manifest.resolve(rel);
        if (!std::filesystem::exists(path))
            throw ValidationError("scan " + scan.scan_id + ": missing raster file " + path.string());
        const auto header = read_raster_header(path);
        if (header.dtype != want)
            throw ValidationError("scan " + scan.scan_id + ": " + path.string() + " has the wrong dtype");
        if (header.scan_id != scan.scan_id)
            throw ValidationError("scan " + scan.scan_id + ": " + path.string() + " belongs to scan '" +
                                  header.scan_id + "'");
        if (header.sections.size() != scan.reviewed_indices.size())
            throw ValidationError("scan " + scan.scan_id + ": " + path.string() + " has " +
                                  std::to_string(header.sections.size()) + " sections, expected " +
                                  std::to_string(scan.reviewed_indices.size()) + " reviewed sections");
        for (std::size_t k = 0; k < header.sections.size(); ++k) {
            const auto& hs = header.sections[k];
            if (hs.index != scan.reviewed_indices[k])
                throw ValidationError("scan " + scan.scan_id + ", section " + std::to_string(hs.index) +
                                      ": not the reviewed section expected at position " + std::to_string(k));
            const auto& geo = scan.section(hs.index);
            if (geo.rows != hs.rows || geo.cols != hs.cols)
                throw ValidationError("scan " + scan.scan_id + ", section " + std::to_string(hs.index) +
                                      ": raster is " + std::to_string(hs.rows) + "x" + std::to_string(hs.cols) +
                                      " but geometry is " + std::to_string(geo.rows) + "x" + std::to_string(geo.cols));
        }
    };
    check(entry.prob_path, RasterDtype::f32);
    check(entry.ref_path, RasterDtype::u8);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    auto m = parse_manifest(read_file(path), path.parent_path());
    for (const auto& e : m.scans) check_raster_headers(m, e);
    return m;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
    json doc;
    doc["scans"] = json::array();
    for (const auto& e : manifest.scans) {
        json j;
        j["scan_id"] = e.scan.scan_id;
        j["patient_id"] = e.scan.patient_id;
        j["sections"] = json::array();
        for (const auto& s : e.scan.sections)
            j["sections"].push_back({{"index", s.index},
                                     {"table_position_mm", s.table_position_mm},
                                     {"pixel_spacing_mm", s.pixel_spacing_mm},
                                     {"rows", s.rows},
                                     {"cols", s.cols}});
        j["reviewed_indices"] = e.scan.reviewed_indices;
        if (e.scan.subset_range)
            j["subset_range"] = {{"superior", e.scan.subset_range->superior},
                                 {"inferior", e.scan.subset_range->inferior}};
        j["prob_path"] = e.prob_path;
        j["ref_path"] = e.ref_path;
        doc["scans"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << manifest_to_json(manifest);
    if (!out) throw IoError("write failed for manifest " + path.string());
}

ProbabilityRaster load_probability(const DatasetManifest& manifest, const ManifestEntry& entry) {
    return read_probability_raster(manifest.resolve(entry.prob_path));
}

ReferenceMask load_reference(const DatasetManifest& manifest, const ManifestEntry& entry) {
    return read_reference_mask(manifest.resolve(entry.ref_path));
}

} // namespace segsweep

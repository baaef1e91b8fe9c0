#include "segsweep/raster_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "segsweep/error.hpp"

namespace segsweep {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

const char* dtype_name(RasterDtype d) { return d == RasterDtype::f32 ? "f32" : "u8"; }

std::string describe(const std::filesystem::path& p) { return "raster " + p.string(); }

struct OpenRaster {
    std::ifstream in;
    RasterHeader header;
};

OpenRaster open_raster(const std::filesystem::path& path) {
    OpenRaster r;
    r.in.open(path, std::ios::binary);
    if (!r.in) throw IoError("cannot open " + describe(path));

    std::array<char, 4> magic{};
    std::uint8_t version = 0;
    std::uint32_t len_le = 0;
    r.in.read(magic.data(), 4);
    r.in.read(reinterpret_cast<char*>(&version), 1);
    r.in.read(reinterpret_cast<char*>(&len_le), 4);
    if (!r.in) throw ParseError(describe(path) + ": truncated preamble");
    if (std::memcmp(magic.data(), kRasterMagic, 4) != 0) throw ParseError(describe(path) + ": bad magic bytes");
    if (version != kRasterVersion)
        throw ParseError(describe(path) + ": unsupported format version " + std::to_string(version));

    const std::uint32_t len = to_le(len_le);
    std::string text(len, '\0');
    r.in.read(text.data(), len);
    if (!r.in) throw ParseError(describe(path) + ": truncated header");

    json doc;
    try {
        doc = json::parse(text);
        r.header.scan_id = doc.at("scan_id").get<std::string>();
        const auto dtype = doc.at("dtype").get<std::string>();
        if (dtype == "f32")
            r.header.dtype = RasterDtype::f32;
        else if (dtype == "u8")
            r.header.dtype = RasterDtype::u8;
        else
            throw ParseError(describe(path) + ": unknown dtype '" + dtype + "'");
        for (const auto& s : doc.at("sections")) {
            RasterSectionHeader sh{s.at("index").get<int>(), s.at("rows").get<int>(), s.at("cols").get<int>()};
            if (sh.rows <= 0 || sh.cols <= 0)
                throw ParseError(describe(path) + ": section " + std::to_string(sh.index) + " has empty dimensions");
            r.header.sections.push_back(sh);
        }
    } catch (const json::exception& e) {
        throw ParseError(describe(path) + ": invalid header: " + e.what());
    }
    return r;
}

template <typename T>
std::vector<Grid<T>> read_grids(OpenRaster& r, const std::filesystem::path& path) {
    std::vector<Grid<T>> grids;
    grids.reserve(r.header.sections.size());
    for (const auto& s : r.header.sections) {
        Grid<T> g(s.rows, s.cols);
        r.in.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(T)));
        if (!r.in)
            throw ParseError(describe(path) + ": truncated pixel data in section " + std::to_string(s.index));
        if constexpr (sizeof(T) == 4 && std::endian::native == std::endian::big) {
            for (auto& v : g.values) v = std::bit_cast<T>(to_le(std::bit_cast<std::uint32_t>(v)));
        }
        grids.push_back(std::move(g));
    }
    if (r.in.peek() != std::char_traits<char>::eof()) throw ParseError(describe(path) + ": trailing bytes after pixel data");
    return grids;
}

template <typename T>
void write_raster(const std::filesystem::path& path, const std::string& scan_id, RasterDtype dtype,
                  const std::vector<int>& indices, const std::vector<Grid<T>>& grids) {
    if (indices.size() != grids.size())
        throw ArgumentError("raster for scan " + scan_id + ": index list and grid count differ");

    json doc;
    doc["scan_id"] = scan_id;
    doc["dtype"] = dtype_name(dtype);
    doc["sections"] = json::array();
    for (std::size_t k = 0; k < grids.size(); ++k)
        doc["sections"].push_back({{"index", indices[k]}, {"rows", grids[k].rows}, {"cols", grids[k].cols}});
    const std::string text = doc.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + describe(path));
    out.write(kRasterMagic, 4);
    out.put(static_cast<char>(kRasterVersion));
    const std::uint32_t len = to_le(static_cast<std::uint32_t>(text.size()));
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& g : grids) {
        if constexpr (sizeof(T) == 4 && std::endian::native == std::endian::big) {
            for (auto v : g.values) {
                const auto le = to_le(std::bit_cast<std::uint32_t>(v));
                out.write(reinterpret_cast<const char*>(&le), 4);
            }
        } else {
            out.write(reinterpret_cast<const char*>(g.values.data()),
                      static_cast<std::streamsize>(g.values.size() * sizeof(T)));
        }
    }
    if (!out) throw IoError("write failed for " + describe(path));
}

std::vector<int> header_indices(const RasterHeader& h) {
    std::vector<int> out;
    for (const auto& s : h.sections) out.push_back(s.index);
    return out;
}

} // namespace

RasterHeader read_raster_header(const std::filesystem::path& path) { return open_raster(path).header; }

ProbabilityRaster read_probability_raster(const std::filesystem::path& path) {
    auto r = open_raster(path);
    if (r.header.dtype != RasterDtype::f32) throw ParseError(describe(path) + ": expected dtype f32");
    ProbabilityRaster out;
    out.scan_id = r.header.scan_id;
    out.section_indices = header_indices(r.header);
    out.grids = read_grids<float>(r, path);
    return out;
}

ReferenceMask read_reference_mask(const std::filesystem::path& path) {
    auto r = open_raster(path);
    if (r.header.dtype != RasterDtype::u8) throw ParseError(describe(path) + ": expected dtype u8");
    ReferenceMask out;
    out.scan_id = r.header.scan_id;
    out.section_indices = header_indices(r.header);
    out.grids = read_grids<std::uint8_t>(r, path);
    return out;
}

void write_probability_raster(const std::filesystem::path& path, const ProbabilityRaster& raster) {
    write_raster(path, raster.scan_id, RasterDtype::f32, raster.section_indices, raster.grids);
}

void write_reference_mask(const std::filesystem::path& path, const ReferenceMask& mask) {
    write_raster(path, mask.scan_id, RasterDtype::u8, mask.section_indices, mask.grids);
}

} // namespace segsweep

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "shapelab/geo_graph.hpp"
#include "shapelab/passage.hpp"
#include "shapelab/point_set.hpp"

namespace shapelab {

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_text(std::string_view text) {
    return fnv1a({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

/// Little-endian byte buffer used for all binary containers.
class byte_writer {
   public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char tag[5]) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(tag[i]));
    }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

   private:
    std::vector<std::uint8_t> bytes_;
};

class byte_reader {
   public:
    explicit byte_reader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void expect_magic(const char tag[5]) {
        const auto b = take(4);
        for (int i = 0; i < 4; ++i)
            if (b[i] != static_cast<std::uint8_t>(tag[i]))
                throw corrupt_file("binary container: wrong magic");
    }
    std::size_t offset() const { return offset_; }
    std::size_t remaining() const { return bytes_.size() - offset_; }
    std::span<const std::uint8_t> all() const { return bytes_; }

   private:
    std::span<const std::uint8_t> take(std::size_t n) {
        if (offset_ + n > bytes_.size()) throw corrupt_file("binary container: truncated");
        const std::span<const std::uint8_t> s(bytes_.data() + offset_, n);
        offset_ += n;
        return s;
    }
    std::vector<std::uint8_t> bytes_;
    std::size_t offset_ = 0;
};

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw resource_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw resource_error("write failed: " + path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw resource_error("cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

/// Appends the checksum of everything written so far and flushes to disk.
inline void seal_and_write(const std::string& path, byte_writer& w) {
    const std::uint64_t checksum = fnv1a(w.bytes());
    w.u64(checksum);
    write_file(path, w.bytes());
}

/// Verifies the trailing checksum and returns a reader over the payload.
inline byte_reader open_sealed(const std::string& path) {
    auto bytes = read_file(path);
    if (bytes.size() < 8) throw corrupt_file("binary container: too short");
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i)
        stored |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + i]) << (8 * i);
    bytes.resize(bytes.size() - 8);
    if (fnv1a(bytes) != stored) throw corrupt_file("binary container: checksum mismatch");
    return byte_reader(std::move(bytes));
}

inline void write_point_set_payload(byte_writer& w, const point_set& ps) {
    w.u32(static_cast<std::uint32_t>(ps.dimension));
    w.f64(ps.intensity);
    w.f64(ps.box_side);
    w.u64(ps.seed);
    w.u64(ps.count());
    for (double c : ps.coords) w.f64(c);
}

inline point_set read_point_set_payload(byte_reader& r) {
    point_set ps;
    ps.dimension = static_cast<int>(r.u32());
    ps.intensity = r.f64();
    ps.box_side = r.f64();
    ps.seed = r.u64();
    const std::uint64_t count = r.u64();
    ps.coords.resize(count * ps.dimension);
    for (double& c : ps.coords) c = r.f64();
    return ps;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Versioned binary containers.

inline void save_point_set(const point_set& ps, const std::string& path) {
    detail::byte_writer w;
    w.magic("SLPS");
    w.u32(kFormatVersion);
    detail::write_point_set_payload(w, ps);
    detail::seal_and_write(path, w);
}

inline point_set load_point_set(const std::string& path) {
    auto r = detail::open_sealed(path);
    r.expect_magic("SLPS");
    if (r.u32() != kFormatVersion) throw format_version_mismatch("point set: format version");
    return detail::read_point_set_payload(r);
}

inline void save_geo_graph(const geo_graph& g, const std::string& path) {
    detail::byte_writer w;
    w.magic("SLGG");
    w.u32(kFormatVersion);
    detail::write_point_set_payload(w, g.points());
    w.f64(g.radius());
    w.u64(g.edge_count());
    for (const auto& [u, v] : g.edges()) {
        w.u32(u);
        w.u32(v);
    }
    for (std::uint32_t c : g.component_ids()) w.u32(c);
    w.u32(g.giant_component_id());
    detail::seal_and_write(path, w);
}

/// Rebuilds the graph from the stored points and radius, then cross-checks
/// the stored edge list and component labels against the rebuild.
inline geo_graph load_geo_graph(const std::string& path) {
    auto r = detail::open_sealed(path);
    r.expect_magic("SLGG");
    if (r.u32() != kFormatVersion) throw format_version_mismatch("graph: format version");
    point_set ps = detail::read_point_set_payload(r);
    const double radius = r.f64();
    geo_graph g(std::move(ps), radius);
    const std::uint64_t edge_count = r.u64();
    if (edge_count != g.edge_count()) throw corrupt_file("graph: edge count mismatch");
    for (const auto& [u, v] : g.edges()) {
        const auto su = r.u32();
        const auto sv = r.u32();
        if (su != u || sv != v) throw corrupt_file("graph: edge list mismatch");
    }
    for (std::uint32_t c : g.component_ids()) {
        if (r.u32() != c) throw corrupt_file("graph: component labels mismatch");
    }
    if (r.u32() != g.giant_component_id()) throw corrupt_file("graph: giant id mismatch");
    return g;
}

/// The weight table is stored alongside the graph; loading re-derives the
/// weights from the seed and verifies them against the stored values.
inline void save_passage_field(const passage_field& field, const std::string& path) {
    detail::byte_writer w;
    w.magic("SLPF");
    w.u32(kFormatVersion);
    detail::write_point_set_payload(w, field.graph->points());
    w.f64(field.graph->radius());
    w.u8(static_cast<std::uint8_t>(field.distribution.variant));
    w.f64(field.distribution.param_a);
    w.f64(field.distribution.param_b);
    w.u64(field.seed);
    w.u64(field.weights.size());
    for (double x : field.weights) w.f64(x);
    detail::seal_and_write(path, w);
}

struct loaded_passage_field {
    geo_graph graph;
    passage_field field;  // field.graph points at this->graph
};

inline loaded_passage_field load_passage_field(const std::string& path) {
    auto r = detail::open_sealed(path);
    r.expect_magic("SLPF");
    if (r.u32() != kFormatVersion) throw format_version_mismatch("passage field: format version");
    point_set ps = detail::read_point_set_payload(r);
    const double radius = r.f64();
    weight_distribution dist;
    dist.variant = static_cast<weight_distribution::kind>(r.u8());
    dist.param_a = r.f64();
    dist.param_b = r.f64();
    const std::uint64_t seed = r.u64();
    const std::uint64_t count = r.u64();
    loaded_passage_field out{geo_graph(std::move(ps), radius), {}};
    out.field = assign_weights(out.graph, dist, seed);
    if (count != out.field.weights.size()) throw corrupt_file("passage field: weight count mismatch");
    for (double w : out.field.weights) {
        if (r.f64() != w) throw corrupt_file("passage field: weight table mismatch");
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output. Reals are printed with %.17g, which round-trips exactly.

class csv_writer {
   public:
    csv_writer(const std::string& path, const std::string& columns, std::uint64_t spec_hash)
        : out_(path, std::ios::trunc) {
        if (!out_) throw resource_error("cannot open for writing: " + path);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(spec_hash));
        out_ << "# spec_hash=" << buf << "\n# columns: " << columns << "\n";
    }

    void row(std::span<const double> values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << format(values[i]);
        }
        out_ << '\n';
    }

    void raw_row(const std::string& line) { out_ << line << '\n'; }

    static std::string format(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

   private:
    std::ofstream out_;
};

inline void export_point_set_csv(const point_set& ps, const std::string& path,
                                 std::uint64_t spec_hash) {
    csv_writer csv(path, "coordinates (one point per line)", spec_hash);
    std::vector<double> row(ps.dimension);
    for (std::size_t i = 0; i < ps.count(); ++i) {
        const auto p = ps.point(i);
        std::copy(p.begin(), p.end(), row.begin());
        csv.row(row);
    }
}

inline void export_adjacency_csv(const geo_graph& g, const std::string& path,
                                 std::uint64_t spec_hash) {
    csv_writer csv(path, "vertex,neighbors...", spec_hash);
    for (vertex_id v = 0; v < g.vertex_count(); ++v) {
        std::ostringstream line;
        line << v;
        for (vertex_id w : g.neighbors(v)) line << ',' << w;
        csv.raw_row(line.str());
    }
}

}  // namespace shapelab

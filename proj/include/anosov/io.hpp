// Serialization for the command-line tools: CSV emitters for every result
// type, the binary matrix dump, run manifests, and the content-hash naming
// of run directories.  All text output is locale-independent: '.' decimal
// separator, 17 significant digits, one header line per table.
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anosov/bounds.hpp"
#include "anosov/fredholm.hpp"
#include "anosov/growth.hpp"
#include "anosov/spectral.hpp"
#include "anosov/transfer.hpp"
#include "anosov/trig_poly.hpp"

extern "C" char* openblas_get_config(void);

namespace anosov {

// ---------------------------------------------------------------- formatting

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// 64-bit FNV-1a, used to derive run-directory names from config content
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string run_directory_name(const std::string& config_bytes,
                                      std::uint64_t seed,
                                      const std::string& subcommand) {
    std::string key = config_bytes;
    key += '\n';
    key += std::to_string(seed);
    key += '\n';
    key += subcommand;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    return buf;
}

// --------------------------------------------------------------- CSV tables

inline void write_bound_csv(std::ostream& os, const BoundReport& rep) {
    os << "n,raw_value,accelerated_value,grid,formula_id\n";
    for (const auto& e : rep.entries)
        os << e.n << ',' << fmt_double(e.raw_value) << ','
           << fmt_double(e.accelerated_value) << ',' << e.grid << ','
           << formula_name(rep.formula) << '\n';
}

struct EigenRow {
    std::complex<double> value;
    double residual = std::numeric_limits<double>::quiet_NaN();
    int half_width = 0;
    std::string kind;
    double p = 0, q = 0, t = 2;
};

inline void append_eigen_rows(std::vector<EigenRow>& rows,
                              const SpectrumResult& res,
                              const GalerkinMatrix& g) {
    for (const auto& e : res.eigs) {
        EigenRow r;
        r.value = e.value;
        r.residual = e.residual;
        r.half_width = g.half_width;
        r.kind = g.kind.name();
        r.p = g.params.p;
        r.q = g.params.q;
        r.t = g.params.t;
        rows.push_back(std::move(r));
    }
}

inline void write_eigen_csv(std::ostream& os, const std::vector<EigenRow>& rows) {
    os << "re,im,modulus,residual,N,kind,p,q,t\n";
    for (const auto& r : rows)
        os << fmt_double(r.value.real()) << ',' << fmt_double(r.value.imag())
           << ',' << fmt_double(std::abs(r.value)) << ','
           << fmt_double(r.residual) << ',' << r.half_width << ',' << r.kind
           << ',' << fmt_double(r.p) << ',' << fmt_double(r.q) << ','
           << fmt_double(r.t) << '\n';
}

inline void write_growth_csv(std::ostream& os, const GrowthRecord& rec) {
    os << "n,strong_norm,weak_norm\n";
    for (std::size_t n = 0; n < rec.strong.size(); ++n)
        os << n << ',' << fmt_double(rec.strong[n]) << ','
           << fmt_double(rec.weak[n]) << '\n';
}

// One file, two tables: the trace/coefficient rows, a blank line, then the
// located zeros with their error bars.
inline void write_determinant_csv(std::ostream& os, const DeterminantSeries& s,
                                  const std::vector<DeterminantZero>& zeros) {
    os << "n,t_n,c_n\n";
    for (int n = 1; n <= s.order(); ++n)
        os << n << ',' << fmt_double(s.traces[static_cast<std::size_t>(n - 1)])
           << ',' << fmt_double(s.coeffs[static_cast<std::size_t>(n)]) << '\n';
    os << '\n';
    os << "re,im,error_bar\n";
    auto sorted = zeros;
    std::sort(sorted.begin(), sorted.end(),
              [](const DeterminantZero& a, const DeterminantZero& b) {
                  double ma = std::abs(a.z), mb = std::abs(b.z);
                  if (ma != mb) return ma < mb;
                  if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
                  return a.z.imag() < b.z.imag();
              });
    for (const auto& z : sorted)
        os << fmt_double(z.z.real()) << ',' << fmt_double(z.z.imag()) << ','
           << fmt_double(z.error_bar) << '\n';
}

inline void write_resonance_csv(std::ostream& os, const ResonanceReport& rep) {
    os << "zero_re,zero_im,error_bar,eig_re,eig_im,mismatch,flagged\n";
    for (const auto& p : rep.pairs)
        os << fmt_double(p.zero.real()) << ',' << fmt_double(p.zero.imag())
           << ',' << fmt_double(p.zero_error_bar) << ','
           << fmt_double(p.eigenvalue.real()) << ','
           << fmt_double(p.eigenvalue.imag()) << ',' << fmt_double(p.mismatch)
           << ',' << (p.flagged ? 1 : 0) << '\n';
}

inline void write_trig_poly_csv(std::ostream& os, const TrigPoly& f) {
    os << "k1,k2,re,im\n";
    const int N = f.half_width();
    for (int k1 = -N; k1 <= N; ++k1)
        for (int k2 = -N; k2 <= N; ++k2) {
            auto c = f.coeff_or_zero(k1, k2);
            os << k1 << ',' << k2 << ',' << fmt_double(c.real()) << ','
               << fmt_double(c.imag()) << '\n';
        }
}

inline TrigPoly read_trig_poly_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("k1,k2,", 0) != 0)
        throw std::runtime_error("coefficient CSV: missing k1,k2,re,im header");
    struct Row {
        int k1, k2;
        std::complex<double> c;
    };
    std::vector<Row> rows;
    int half = 0;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        Row r;
        double re, im;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &r.k1, &r.k2, &re, &im) != 4)
            throw std::runtime_error("coefficient CSV: bad row '" + line + "'");
        r.c = {re, im};
        half = std::max({half, std::abs(r.k1), std::abs(r.k2)});
        rows.push_back(r);
    }
    TrigPoly f(half);
    for (const auto& r : rows) f.coeff(r.k1, r.k2) = r.c;
    return f;
}

// ---------------------------------------------------------- binary matrices

// 32-byte header: magic "AGKM", N and the kind id as 16-bit words, then
// p, q, t as doubles; the payload is the column-major complex matrix.
// Little-endian throughout, which is asserted at write time.
inline void write_matrix_dump(std::ostream& os, const GalerkinMatrix& g) {
    const std::uint16_t probe = 1;
    char probe_lo;
    std::memcpy(&probe_lo, &probe, 1);
    if (probe_lo != 1)
        throw std::runtime_error("matrix dump requires a little-endian host");

    char header[32] = {};
    std::memcpy(header, "AGKM", 4);
    std::uint16_t n16 = static_cast<std::uint16_t>(g.half_width);
    std::uint16_t kind16 = static_cast<std::uint16_t>(g.kind.family);
    std::memcpy(header + 4, &n16, 2);
    std::memcpy(header + 6, &kind16, 2);
    double meta[3] = {g.params.p, g.params.q, g.params.t};
    std::memcpy(header + 8, meta, 24);
    os.write(header, 32);
    os.write(reinterpret_cast<const char*>(g.a.data()),
             static_cast<std::streamsize>(g.a.size() * sizeof(g.a[0])));
}

inline GalerkinMatrix read_matrix_dump(std::istream& is, Vec2 stable_dir) {
    char header[32];
    is.read(header, 32);
    if (!is || std::memcmp(header, "AGKM", 4) != 0)
        throw std::runtime_error("matrix dump: bad magic");
    std::uint16_t n16, kind16;
    std::memcpy(&n16, header + 4, 2);
    std::memcpy(&kind16, header + 6, 2);
    double meta[3];
    std::memcpy(meta, header + 8, 24);

    GalerkinMatrix g;
    g.half_width = n16;
    g.kind.family = static_cast<OperatorKind::Family>(kind16);
    g.kind.t = (g.kind.family == OperatorKind::Family::Lt ||
                g.kind.family == OperatorKind::Family::Mt)
                   ? meta[2]
                   : 0.0;
    g.params = AnisoParams(meta[0], meta[1], meta[2], stable_dir);
    g.a.resize(static_cast<std::size_t>(g.dim()) * g.dim());
    is.read(reinterpret_cast<char*>(g.a.data()),
            static_cast<std::streamsize>(g.a.size() * sizeof(g.a[0])));
    if (!is) throw std::runtime_error("matrix dump: truncated payload");
    return g;
}

// ----------------------------------------------------------------- manifest

// Written before any result file with status "incomplete", rewritten with
// "complete" and the wall time once the run finishes.  A crash therefore
// leaves an honest marker behind.
struct RunManifest {
    std::string tool_version = "anosov-tools 0.1.0";
    std::string subcommand;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    std::string config_text;
    std::vector<std::string> verdicts;  // one JSON-like object per line
};

inline void write_manifest(const std::string& path, const RunManifest& m,
                           bool complete, double wall_seconds) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write manifest at " + path);
    os << m.tool_version << '\n';
    os << "status: " << (complete ? "complete" : "incomplete") << '\n';
    os << "subcommand: " << m.subcommand << '\n';
    os << "seed: " << m.seed << (m.seed_given ? "" : " (default)") << '\n';
    os << "threads: " << m.threads << '\n';
    os << "versions: fftw " << fftw_version << "; "
       << openblas_get_config() << '\n';
    if (complete) os << "wall_seconds: " << fmt_double(wall_seconds) << '\n';
    os << "config:\n";
    std::istringstream cfg(m.config_text);
    std::string line;
    while (std::getline(cfg, line)) os << "  " << line << '\n';
    if (!m.verdicts.empty()) {
        os << "verdicts:\n";
        for (const auto& v : m.verdicts) os << "  " << v << '\n';
    }
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << body;
}

template <class Fn>
void write_file_with(const std::string& path, Fn&& fn) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    fn(os);
}

}  // namespace anosov

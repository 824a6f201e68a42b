#include "dnls/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dnls::io {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_row(const std::string& line, std::size_t want, std::size_t lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
            throw ValidationError("malformed number on line " + std::to_string(lineno));
        }
    }
    if (out.size() != want)
        throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(want) + " columns");
    return out;
}

// Splits a CSV text into its header tokens (after '#') and data rows.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> parse_csv(const std::string& text,
                                                                                   std::size_t cols) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header.empty()) {
                std::istringstream hs(line.substr(1));
                std::string tok;
                while (hs >> tok) header.push_back(tok);
            }
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // column names
        rows.push_back(parse_row(line, cols, lineno));
    }
    return {header, rows};
}

void check_abscissae(const RealGrid& g, const std::vector<std::vector<double>>& rows) {
    if (rows.size() != g.n)
        throw ValidationError("expected " + std::to_string(g.n) + " rows, found " + std::to_string(rows.size()));
    const double tol = 1e-9 * std::max(1.0, std::abs(g.z_max) + std::abs(g.z_min));
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::abs(rows[i][0] - g.at(i)) > tol)
            throw ValidationError("abscissa on row " + std::to_string(i) + " does not match the header grid");
}

}  // namespace

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("write failed for " + path);
}

std::string format_potential(const Potential& u) {
    const RealGrid& g = u.x_grid;
    if (std::abs(g.z_min + g.z_max) > 1e-12 * std::max(1.0, g.z_max))
        throw ValidationError("potential files store symmetric windows [-X, X]");
    std::string s = "# potential " + num(g.z_max) + " " + std::to_string(g.n) + "\nx,re_u,im_u\n";
    for (std::size_t i = 0; i < g.n; ++i)
        s += num(g.at(i)) + "," + num(u.u[i].real()) + "," + num(u.u[i].imag()) + "\n";
    return s;
}

Potential parse_potential(const std::string& text) {
    auto [hdr, rows] = parse_csv(text, 3);
    if (hdr.size() != 3 || hdr[0] != "potential") throw ValidationError("missing '# potential X n' header");
    double X;
    std::size_t n;
    try {
        X = std::stod(hdr[1]);
        n = std::stoul(hdr[2]);
    } catch (const std::exception&) {
        throw ValidationError("malformed potential header");
    }
    const RealGrid g = RealGrid::symmetric(X, n);
    check_grid(g, false);
    check_abscissae(g, rows);
    cvec u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = {rows[i][1], rows[i][2]};
    return Potential(g, std::move(u));
}

void write_potential(const std::string& path, const Potential& u) { write_text(path, format_potential(u)); }
Potential read_potential(const std::string& path) { return parse_potential(read_text(path)); }

void write_grid_function(const std::string& path, const GridFunction& f) {
    const RealGrid& g = f.grid;
    std::string s = "# grid " + num(g.z_min) + " " + num(g.z_max) + " " + std::to_string(g.n) + "\nz,re,im\n";
    for (std::size_t i = 0; i < g.n; ++i)
        s += num(g.at(i)) + "," + num(f.values[i].real()) + "," + num(f.values[i].imag()) + "\n";
    write_text(path, s);
}

GridFunction read_grid_function(const std::string& path) {
    auto [hdr, rows] = parse_csv(read_text(path), 3);
    if (hdr.size() != 4 || hdr[0] != "grid") throw ValidationError("missing '# grid z_min z_max n' header");
    RealGrid g;
    try {
        g = RealGrid{std::stod(hdr[1]), std::stod(hdr[2]), std::stoul(hdr[3])};
    } catch (const std::exception&) {
        throw ValidationError("malformed grid header");
    }
    check_grid(g, false);
    check_abscissae(g, rows);
    cvec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = {rows[i][1], rows[i][2]};
    return GridFunction(g, std::move(v));
}

void write_transfer(const std::string& path, const TransferData& T) {
    const RealGrid& g = T.a.grid;
    std::string s = "# grid " + num(g.z_min) + " " + num(g.z_max) + " " + std::to_string(g.n) +
                    "\nz,re_a,im_a,re_r_plus,im_r_plus,re_r_minus,im_r_minus\n";
    for (std::size_t i = 0; i < g.n; ++i) {
        const cplx a = T.a.values[i], p = T.r_plus.values[i], m = T.r_minus.values[i];
        s += num(g.at(i)) + "," + num(a.real()) + "," + num(a.imag()) + "," + num(p.real()) + "," + num(p.imag()) +
             "," + num(m.real()) + "," + num(m.imag()) + "\n";
    }
    write_text(path, s);
}

void write_scattering(const std::string& path, const ScatteringData& S) { write_text(path, serialize(S)); }

ScatteringData read_scattering(const std::string& path, bool strict, Diagnostics* diag) {
    return deserialize(read_text(path), strict, diag);
}

void write_json(const std::string& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

}  // namespace dnls::io

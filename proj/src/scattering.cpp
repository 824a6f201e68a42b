#include "dnls/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dnls {

PoleData PoleData::make(cplx z, cplx c) {
    if (!(z.imag() > 0)) throw ValidationError("pole must lie in the upper half plane");
    if (c == 0.0) throw ValidationError("norming constant must be nonzero");
    return PoleData{z, first_quadrant_sqrt(z), c};
}

ScatteringData ScatteringData::empty(const RealGrid& g) {
    ScatteringData S;
    S.grid = g;
    S.r_plus = GridFunction(g, cvec(g.n, 0.0));
    S.r_minus = GridFunction(g, cvec(g.n, 0.0));
    return S;
}

ScatteringData ScatteringData::from_r_plus(const RealGrid& g, const cvec& r_plus, std::vector<PoleData> poles,
                                           double c0) {
    ScatteringData S;
    S.grid = g;
    S.r_plus = GridFunction(g, r_plus);
    cvec rm(g.n);
    for (std::size_t i = 0; i < g.n; ++i) rm[i] = 4.0 * g.at(i) * r_plus[i];
    S.r_minus = GridFunction(g, rm);
    S.poles = std::move(poles);
    S.c0 = c0;
    return S;
}

bool Diagnostics::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* Diagnostics::find(const std::string& name) const {
    for (auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string Diagnostics::summary() const {
    std::ostringstream os;
    for (auto& c : checks) {
        if (c.passed) continue;
        os << c.name << " failed (worst " << c.worst;
        if (c.index >= 0) os << " at index " << c.index;
        os << "); ";
    }
    return os.str();
}

Diagnostics validate(const ScatteringData& S, double tol) {
    Diagnostics d;
    const std::size_t n = S.grid.n;
    Check len{"lengths"};
    len.passed = S.r_plus.values.size() == n && S.r_minus.values.size() == n && S.r_plus.grid == S.grid &&
                 S.r_minus.grid == S.grid;
    d.checks.push_back(len);
    if (!len.passed) return d;

    Check rel{"relation"}, pos{"constraint_positive"}, neg{"constraint_negative"};
    for (std::size_t i = 0; i < n; ++i) {
        const double z = S.grid.at(i);
        const cplx rp = S.r_plus.values[i], rm = S.r_minus.values[i];
        if (z != 0.0) {
            const double e = std::abs(rm - 4.0 * z * rp) / std::max(1.0, std::abs(rm));
            if (e > rel.worst) {
                rel.worst = e;
                rel.index = static_cast<long>(i);
            }
        }
        const double q = (1.0 + std::conj(rp) * rm).real();
        if (z > 0) {
            const double e = std::max(0.0, 1.0 - q);
            if (e > pos.worst) {
                pos.worst = e;
                pos.index = static_cast<long>(i);
            }
        } else if (z < 0) {
            const double e = std::max(0.0, S.c0 * S.c0 - q);
            if (e > neg.worst) {
                neg.worst = e;
                neg.index = static_cast<long>(i);
            }
        }
    }
    rel.passed = rel.worst <= 1e-10;
    pos.passed = pos.worst <= tol;
    neg.passed = neg.worst <= tol;
    d.checks.push_back(rel);
    d.checks.push_back(pos);
    d.checks.push_back(neg);

    Check c0{"c0_positive"};
    c0.passed = S.c0 > 0 && std::isfinite(S.c0);
    c0.worst = S.c0;
    d.checks.push_back(c0);

    Check upper{"poles_upper"}, lam{"poles_lambda"}, cnz{"poles_c_nonzero"}, dist{"poles_distinct"};
    for (std::size_t k = 0; k < S.poles.size(); ++k) {
        const auto& p = S.poles[k];
        if (!(p.z.imag() > 0)) {
            upper.passed = false;
            upper.index = static_cast<long>(k);
        }
        const double le = std::abs(p.lambda * p.lambda - p.z) / std::max(1.0, std::abs(p.z));
        if (le > lam.worst) {
            lam.worst = le;
            lam.index = static_cast<long>(k);
        }
        if (!(p.lambda.real() > 0 && p.lambda.imag() > 0)) {
            lam.passed = false;
            lam.index = static_cast<long>(k);
        }
        if (p.c == 0.0) {
            cnz.passed = false;
            cnz.index = static_cast<long>(k);
        }
        for (std::size_t j = 0; j < k; ++j)
            if (std::abs(S.poles[j].z - p.z) < 1e-12 * std::max(1.0, std::abs(p.z))) {
                dist.passed = false;
                dist.index = static_cast<long>(k);
            }
    }
    if (lam.worst > 1e-12) lam.passed = false;
    d.checks.push_back(upper);
    d.checks.push_back(lam);
    d.checks.push_back(cnz);
    d.checks.push_back(dist);
    return d;
}

ScatteringData evolve(const ScatteringData& S, double t) {
    ScatteringData out = S;
    for (std::size_t i = 0; i < S.grid.n; ++i) {
        const double z = S.grid.at(i);
        const cplx ph = std::exp(I * (4.0 * z * z * t));
        out.r_plus.values[i] *= ph;
        out.r_minus.values[i] *= ph;
    }
    for (auto& p : out.poles) p.c *= std::exp(4.0 * I * p.z * p.z * t);
    return out;
}

ForwardResult forward(const Potential& pot, const RealGrid& zgrid, ForwardOptions opt) {
    JostPropagator prop(pot, opt.transfer.jost);
    ForwardResult res;
    res.transfer = compute_transfer(prop, zgrid, opt.transfer);
    std::vector<PoleData> poles;
    if (opt.find_poles) {
        Rect region = opt.region;
        if (region.re_max <= region.re_min) {
            const double zm = std::max(std::abs(zgrid.z_min), std::abs(zgrid.z_max));
            region = Rect{-zm / 2, zm / 2, 0.01, zm / 2};
        }
        for (cplx zk : find_eigenvalues(prop, region, opt.eigen)) {
            NormingConstant nc = compute_norming_constants(prop, zk);
            res.norming.push_back(nc);
            poles.push_back(PoleData{zk, nc.lambda, nc.c});
        }
    }
    res.data.grid = zgrid;
    res.data.r_plus = res.transfer.r_plus;
    res.data.r_minus = res.transfer.r_minus;
    res.data.poles = std::move(poles);
    res.data.c0 = res.transfer.c0;
    return res;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json pair(cplx c) { return nlohmann::json::array({c.real(), c.imag()}); }

cplx unpair(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError(std::string("schema: ") + what + " must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

cvec unpair_list(const nlohmann::json& j, std::size_t n, const char* what) {
    if (!j.is_array() || j.size() != n) throw ValidationError(std::string("schema: ") + what + " has wrong length");
    cvec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = unpair(j[i], what);
    return out;
}

}  // namespace

nlohmann::json to_json(const ScatteringData& S) {
    nlohmann::json doc;
    doc["version"] = "dnls-ist/1";
    doc["grid"] = {{"z_min", S.grid.z_min}, {"z_max", S.grid.z_max}, {"n", S.grid.n}};
    auto rp = nlohmann::json::array(), rm = nlohmann::json::array();
    for (auto& c : S.r_plus.values) rp.push_back(pair(c));
    for (auto& c : S.r_minus.values) rm.push_back(pair(c));
    doc["r_plus"] = std::move(rp);
    doc["r_minus"] = std::move(rm);
    auto poles = nlohmann::json::array();
    for (auto& p : S.poles) poles.push_back({{"z", pair(p.z)}, {"lambda", pair(p.lambda)}, {"c", pair(p.c)}});
    doc["poles"] = std::move(poles);
    doc["c0"] = S.c0;
    return doc;
}

ScatteringData from_json(const nlohmann::json& doc, bool strict, Diagnostics* diag) {
    if (!doc.is_object()) throw ValidationError("schema: document must be an object");
    if (!doc.contains("version") || doc["version"] != "dnls-ist/1")
        throw ValidationError("schema: unsupported or missing version");
    for (const char* key : {"grid", "r_plus", "r_minus", "c0"})
        if (!doc.contains(key)) throw ValidationError(std::string("schema: missing field ") + key);
    const auto& g = doc["grid"];
    if (!g.contains("z_min") || !g.contains("z_max") || !g.contains("n"))
        throw ValidationError("schema: grid needs z_min, z_max, n");
    ScatteringData S;
    S.grid = RealGrid{g["z_min"].get<double>(), g["z_max"].get<double>(), g["n"].get<std::size_t>()};
    check_grid(S.grid);
    S.r_plus = GridFunction(S.grid, unpair_list(doc["r_plus"], S.grid.n, "r_plus"));
    S.r_minus = GridFunction(S.grid, unpair_list(doc["r_minus"], S.grid.n, "r_minus"));
    S.c0 = doc["c0"].get<double>();
    if (doc.contains("poles")) {
        for (const auto& p : doc["poles"]) {
            if (!p.contains("z") || !p.contains("c")) throw ValidationError("schema: pole needs z and c");
            PoleData pd;
            pd.z = unpair(p["z"], "pole z");
            if (!(pd.z.imag() > 0)) throw ValidationError("schema: pole with Im z <= 0");
            pd.c = unpair(p["c"], "pole c");
            pd.lambda = p.contains("lambda") ? unpair(p["lambda"], "pole lambda") : first_quadrant_sqrt(pd.z);
            S.poles.push_back(pd);
        }
    }
    Diagnostics d = validate(S);
    if (diag) *diag = d;
    if (strict && !d.ok()) throw ValidationError("scattering data violate constraints: " + d.summary());
    return S;
}

std::string serialize(const ScatteringData& S) { return to_json(S).dump(1); }

ScatteringData deserialize(const std::string& text, bool strict, Diagnostics* diag) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("schema: ") + e.what());
    }
    try {
        return from_json(doc, strict, diag);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("schema: ") + e.what());
    }
}

}  // namespace dnls

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/direct.hpp"

namespace dnls {

struct PoleData {
    cplx z;
    cplx lambda;
    cplx c;

    static PoleData make(cplx z, cplx c);
};

struct ScatteringData {
    RealGrid grid;
    GridFunction r_plus;
    GridFunction r_minus;
    std::vector<PoleData> poles;
    double c0 = 1.0;

    static ScatteringData empty(const RealGrid& g);
    // r- is derived from r+ through r- = 4 z r+.
    static ScatteringData from_r_plus(const RealGrid& g, const cvec& r_plus, std::vector<PoleData> poles = {},
                                      double c0 = 1.0);
};

struct Check {
    std::string name;
    bool passed = true;
    double worst = 0.0;
    long index = -1;
};

struct Diagnostics {
    std::vector<Check> checks;
    bool ok() const;
    const Check* find(const std::string& name) const;
    std::string summary() const;
};

Diagnostics validate(const ScatteringData& S, double tol = 1e-9);

ScatteringData evolve(const ScatteringData& S, double t);

struct ForwardOptions {
    TransferOptions transfer;
    EigenOptions eigen;
    bool find_poles = true;
    // Eigenvalue search rectangle; zero width selects the default built from the z-grid.
    Rect region{0, 0, 0, 0};
};

struct ForwardResult {
    ScatteringData data;
    TransferData transfer;
    std::vector<NormingConstant> norming;
};

ForwardResult forward(const Potential& pot, const RealGrid& zgrid, ForwardOptions opt = {});

nlohmann::json to_json(const ScatteringData& S);
ScatteringData from_json(const nlohmann::json& doc, bool strict = true, Diagnostics* diag = nullptr);

std::string serialize(const ScatteringData& S);
ScatteringData deserialize(const std::string& text, bool strict = true, Diagnostics* diag = nullptr);

}  // namespace dnls

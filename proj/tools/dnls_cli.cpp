#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnls/backlund.hpp"
#include "dnls/io.hpp"
#include "dnls/pde.hpp"
#include "dnls/solitons.hpp"

using namespace dnls;
using nlohmann::json;

namespace {

struct Common {
    double X = 20.0;
    std::size_t nx = 2048;
    double zmax = 30.0;
    std::size_t nz = 2048;
    double tol = 1e-6;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool strict = false;
};

struct Run {
    std::string command;
    json inputs = json::object();
    json diagnostics = json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

json cjson(cplx v) { return json::array({v.real(), v.imag()}); }

RealGrid zgrid(const Common& c) { return RealGrid::symmetric(c.zmax, c.nz); }
RealGrid xgrid(const Common& c) { return RealGrid::symmetric(c.X, c.nx); }

void write_manifest(const std::string& out, const Common& c, const Run& run) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
    json m;
    m["command"] = run.command;
    m["inputs"] = run.inputs;
    m["outputs"] = run.outputs;
    m["grid"] = {{"X", c.X}, {"nx", c.nx}, {"zmax", c.zmax}, {"nz", c.nz}};
    m["tolerances"] = {{"tol", c.tol}, {"strict", c.strict}};
    m["threads"] = c.threads;
    m["timing_seconds"] = secs;
    m["diagnostics"] = run.diagnostics;
    io::write_json(out + ".manifest.json", m);
}

// Accepted RHP solves must meet the run tolerance; anything worse is a resolution refusal.
void enforce(const ReconstructionResult& r, double tol, json& diag) {
    diag["max_jump_residual"] = r.max_jump_residual;
    diag["max_det_error"] = r.max_det_error;
    diag["band_mismatch"] = r.band_mismatch;
    diag["rec2_residual"] = r.rec2_residual;
    diag["max_iterations"] = r.max_iterations;
    if (!(r.max_jump_residual <= tol) || !(r.max_det_error <= tol))
        throw ResolutionError("RHP solves miss the tolerance: jump residual " + std::to_string(r.max_jump_residual) +
                              ", det error " + std::to_string(r.max_det_error));
}

ForwardResult run_forward(const Potential& u, const Common& c, json& diag) {
    ForwardOptions opt;
    opt.transfer.threads = c.threads;
    ForwardResult F = forward(u, zgrid(c), opt);
    diag["conservation_error"] = F.transfer.conservation_error;
    diag["min_abs_a"] = F.transfer.min_abs_a;
    diag["sup_r_plus"] = sup_norm(F.data.r_plus.values);
    diag["sup_r_minus"] = sup_norm(F.data.r_minus.values);
    diag["poles"] = json::array();
    for (const auto& p : F.data.poles) diag["poles"].push_back({{"z", cjson(p.z)}, {"c", cjson(p.c)}});
    const Diagnostics d = validate(F.data, c.tol);
    diag["validation"] = d.summary();
    if (c.strict && !d.ok()) throw ValidationError("computed scattering data violate constraints: " + d.summary());
    return F;
}

Potential run_inverse(const ScatteringData& S, const RealGrid& xg, const Common& c, json& diag) {
    DressOptions opt;
    opt.rhp.threads = c.threads;
    const DressAllResult R = dress_all(S, xg, opt);
    if (!S.poles.empty()) {
        diag["max_residue_error"] = R.max_residue_error;
        diag["max_dressed_jump"] = R.max_dressed_jump;
        diag["min_abs_detA"] = R.min_abs_detA;
    }
    enforce(R.rec, c.tol, diag);
    return R.rec.potential;
}

json metrics(const CompareMetrics& m) { return {{"sup", m.sup}, {"l2", m.l2}, {"weighted_l2", m.weighted_l2}}; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direct and inverse scattering for the derivative NLS equation"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--X", c.X, "half-width of the x window")->capture_default_str();
    app.add_option("--nx", c.nx, "x grid points")->capture_default_str();
    app.add_option("--zmax", c.zmax, "half-width of the z window")->capture_default_str();
    app.add_option("--nz", c.nz, "z grid points")->capture_default_str();
    app.add_option("--tol", c.tol, "acceptance tolerance for constraints and RHP solves")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--strict", c.strict, "refuse data that fail the scattering constraints");

    Run run;
    std::string in, out, transfer_out, save_u;
    double t = 1.0, t_sol = 0.0, dt = 1e-3;

    auto* sol = app.add_subcommand("soliton", "sample a one-soliton on the x grid");
    SolitonParams sp;
    std::vector<double> z1, c1;
    sol->add_option("--omega", sp.omega)->capture_default_str();
    sol->add_option("--v", sp.v)->capture_default_str();
    sol->add_option("--x0", sp.x0)->capture_default_str();
    sol->add_option("--gamma", sp.gamma)->capture_default_str();
    auto* oz = sol->add_option("--z1", z1, "pole as: re im")->expected(2);
    auto* oc = sol->add_option("--c1", c1, "norming constant as: re im")->expected(2);
    oz->needs(oc);
    oc->needs(oz);
    sol->add_option("--t", t_sol, "time")->capture_default_str();
    sol->add_option("-o,--output", out)->required();

    auto* gau = app.add_subcommand("gaussian", "sample A exp(-(x / s)^2) on the x grid");
    double amp = 0.3, width = 1.0;
    gau->add_option("--amplitude", amp)->capture_default_str();
    gau->add_option("--width", width)->capture_default_str()->check(CLI::PositiveNumber);
    gau->add_option("-o,--output", out)->required();

    auto* fwd = app.add_subcommand("forward", "potential file -> scattering data");
    fwd->add_option("input", in)->required()->check(CLI::ExistingFile);
    fwd->add_option("-o,--output", out)->required();
    fwd->add_option("--transfer", transfer_out, "also write a(z), r+(z), r-(z) as CSV");

    auto* inv = app.add_subcommand("inverse", "scattering data -> potential on the x grid");
    inv->add_option("input", in)->required()->check(CLI::ExistingFile);
    inv->add_option("-o,--output", out)->required();

    auto* evo = app.add_subcommand("evolve", "advance scattering data to time t");
    evo->add_option("input", in)->required()->check(CLI::ExistingFile);
    evo->add_option("--t", t)->required();
    evo->add_option("-o,--output", out)->required();

    auto* rt = app.add_subcommand("roundtrip", "forward then inverse, compared with the input");
    rt->add_option("input", in)->required()->check(CLI::ExistingFile);
    rt->add_option("-o,--output", out, "report file")->required();
    rt->add_option("--save", save_u, "also write the reconstructed potential");

    auto* ivp = app.add_subcommand("ist-vs-pde", "scattering evolution against direct integration");
    ivp->add_option("input", in)->required()->check(CLI::ExistingFile);
    ivp->add_option("--t", t)->capture_default_str();
    ivp->add_option("--dt", dt, "PDE time step")->capture_default_str();
    ivp->add_option("-o,--output", out, "report file")->required();
    ivp->add_option("--save", save_u, "also write the IST potential at time t");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        run.inputs["file"] = in;
        if (sol->parsed()) {
            run.command = "soliton";
            if (!z1.empty()) sp = params_from_pole({z1[0], z1[1]}, {c1[0], c1[1]});
            const auto [pz, pc] = pole_from_params(sp);
            run.inputs = {{"omega", sp.omega}, {"v", sp.v}, {"x0", sp.x0}, {"gamma", sp.gamma}, {"t", t_sol}};
            run.diagnostics = {{"pole", cjson(pz)}, {"norming_constant", cjson(pc)}};
            const Potential u = one_soliton(sp, xgrid(c), t_sol);
            run.diagnostics["mass"] = u.mass();
            io::write_potential(out, u);
        } else if (gau->parsed()) {
            run.command = "gaussian";
            run.inputs = {{"amplitude", amp}, {"width", width}};
            io::write_potential(out, Potential::sample(xgrid(c), [&](double x) {
                return cplx(amp * std::exp(-(x / width) * (x / width)));
            }));
        } else if (fwd->parsed()) {
            run.command = "forward";
            const Potential u = io::read_potential(in);
            const ForwardResult F = run_forward(u, c, run.diagnostics);
            io::write_scattering(out, F.data);
            if (!transfer_out.empty()) {
                io::write_transfer(transfer_out, F.transfer);
                run.outputs.push_back(transfer_out);
            }
        } else if (inv->parsed()) {
            run.command = "inverse";
            Diagnostics d;
            const ScatteringData S = io::read_scattering(in, c.strict, &d);
            run.diagnostics["validation"] = d.summary();
            io::write_potential(out, run_inverse(S, xgrid(c), c, run.diagnostics));
        } else if (evo->parsed()) {
            run.command = "evolve";
            run.inputs["t"] = t;
            const ScatteringData S = io::read_scattering(in, c.strict);
            io::write_scattering(out, evolve(S, t));
        } else if (rt->parsed()) {
            run.command = "roundtrip";
            const Potential u = io::read_potential(in);
            json& fd = run.diagnostics["forward"];
            const ForwardResult F = run_forward(u, c, fd);
            const Potential v = run_inverse(F.data, u.x_grid, c, run.diagnostics["inverse"]);
            const json rep = {{"command", "roundtrip"}, {"input", in}, {"error", metrics(compare(v, u))}};
            io::write_json(out, rep);
            if (!save_u.empty()) {
                io::write_potential(save_u, v);
                run.outputs.push_back(save_u);
            }
        } else if (ivp->parsed()) {
            run.command = "ist-vs-pde";
            run.inputs["t"] = t;
            run.inputs["dt"] = dt;
            const Potential u = io::read_potential(in);
            const ForwardResult F = run_forward(u, c, run.diagnostics["forward"]);
            const Potential ist = run_inverse(evolve(F.data, t), u.x_grid, c, run.diagnostics["inverse"]);
            EvolutionConfig cfg;
            cfg.dt = dt;
            cfg.t_end = t;
            const EvolutionResult P = evolve_pde(u, cfg);
            run.diagnostics["pde_mass_drift"] = P.mass_drift;
            const json rep = {{"command", "ist-vs-pde"}, {"input", in}, {"t", t}, {"difference", metrics(compare(ist, P.u))}};
            io::write_json(out, rep);
            if (!save_u.empty()) {
                io::write_potential(save_u, ist);
                run.outputs.push_back(save_u);
            }
        }
        run.outputs.insert(run.outputs.begin(), out);
        write_manifest(out, c, run);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ResolutionError& e) {
        std::cerr << "resolution refused: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

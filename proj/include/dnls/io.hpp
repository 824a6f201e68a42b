#pragma once

#include <string>

#include <json.hpp>

#include "dnls/scattering.hpp"

namespace dnls::io {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// x, re(u), im(u) under the header "# potential X n"
void write_potential(const std::string& path, const Potential& u);
Potential read_potential(const std::string& path);
std::string format_potential(const Potential& u);
Potential parse_potential(const std::string& text);

// z, re, im under the header "# grid z_min z_max n"
void write_grid_function(const std::string& path, const GridFunction& f);
GridFunction read_grid_function(const std::string& path);

// z, re a, im a, re r+, im r+, re r-, im r-
void write_transfer(const std::string& path, const TransferData& T);

void write_scattering(const std::string& path, const ScatteringData& S);
ScatteringData read_scattering(const std::string& path, bool strict = true, Diagnostics* diag = nullptr);

void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace dnls::io

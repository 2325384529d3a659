#pragma once

#include "fraclap/driver.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/rational.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fraclap::io {

/// {"vertices": [[x, y], ...], "cells": [[i, j, k], ...], "refinement_edges": [...]}
void write_mesh_json(std::ostream& out, const Mesh& mesh, std::span<const double> solution = {});
Mesh read_mesh_json(std::istream& in);

/// Legacy ASCII VTK unstructured grid (cell type 5). Optional point field "u"
/// and cell field "eta_bw".
void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const double> u = {},
               std::span<const double> eta = {});

/// cell_index,eta
void write_eta_csv(std::ostream& out, std::span<const double> eta);
std::vector<double> read_eta_csv(std::istream& in);

/// l,weight,diffusion
void write_coefficients_csv(std::ostream& out, const RationalScheme& scheme);

/// step,dofs,eta_global,exact_error,efficiency (empty fields where undefined)
void write_history_csv(std::ostream& out, const RunRecord& record);
std::vector<StepRecord> read_history_csv(std::istream& in);

void write_history_json(std::ostream& out, const RunRecord& record);
RunRecord read_history_json(std::istream& in);

} // namespace fraclap::io

#include <doctest.h>

#include "fraclap/driver.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace fraclap;

namespace {

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}

RunRecord sample_record()
{
    RunRecord r;
    r.problem = "sines2d";
    r.s = 0.3;
    r.kappa = 0.26;
    r.lambda0 = 1.0;
    r.m_neg = 141;
    r.n_pos = 35;
    r.theta = 0.5;
    r.refinement = Refinement::adaptive;
    r.status = "budget";
    for (int i = 0; i < 3; ++i) {
        StepRecord s;
        s.step = i;
        s.dofs = 81u << (2 * i);
        s.cells = 128u << (2 * i);
        s.eta = 0.1 / std::pow(3.0, i) + 1e-17;
        if (i != 1) {
            s.exact_error = s.eta / 1.0837;
            s.efficiency = 1.0837 + 1e-15 * i;
        }
        s.wall_seconds = 0.125 * i;
        r.steps.push_back(s);
    }
    return r;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("mesh json round trip")
{
    const Mesh mesh = refine(unit_square_mesh(3, 1.3), MarkedSet{{0, 4}, 0.5}).mesh;
    std::vector<double> u;
    for (const Point& p : mesh.vertices())
        u.push_back(std::sin(p.x) / 3);
    std::stringstream buffer;
    io::write_mesh_json(buffer, mesh, u);
    const nlohmann::json doc = nlohmann::json::parse(buffer.str());
    CHECK(doc.at("vertices").size() == mesh.num_vertices());
    CHECK(doc.at("cells").size() == mesh.num_cells());
    CHECK(doc.at("u").get<std::vector<double>>() == u);

    const Mesh back = io::read_mesh_json(buffer);
    CHECK(back.cells() == mesh.cells());
    CHECK(back.refinement_edges() == mesh.refinement_edges());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        CHECK(back.vertex(static_cast<int>(v)).x == mesh.vertex(static_cast<int>(v)).x);
        CHECK(back.vertex(static_cast<int>(v)).y == mesh.vertex(static_cast<int>(v)).y);
    }
    // Refining the reloaded mesh reproduces refining the original.
    const MarkedSet marked{{1, 2, 3}, 0.5};
    CHECK(refine(back, marked).mesh.cells() == refine(mesh, marked).mesh.cells());

    std::istringstream minimal(R"({"vertices": [[0,0],[1,0],[0,1]], "cells": [[0,1,2]]})");
    CHECK(io::read_mesh_json(minimal).num_cells() == 1);
    std::istringstream broken(R"({"vertices": [[0,0]]})");
    CHECK_THROWS(io::read_mesh_json(broken));
}

TEST_CASE("vtk layout")
{
    const Mesh mesh = unit_square_mesh(2);
    std::vector<double> u(mesh.num_vertices(), 0.5), eta(mesh.num_cells(), 0.25);
    std::ostringstream out;
    io::write_vtk(out, mesh, u, eta);
    const auto lines = lines_of(out.str());
    CHECK(lines[0] == "# vtk DataFile Version 3.0");
    CHECK(lines[2] == "ASCII");
    CHECK(lines[3] == "DATASET UNSTRUCTURED_GRID");
    CHECK(lines[4] == "POINTS 9 double");
    CHECK(lines[14] == "CELLS 8 32");
    CHECK(lines[23] == "CELL_TYPES 8");
    for (int i = 24; i < 32; ++i)
        CHECK(lines[i] == "5");
    CHECK(lines[32] == "POINT_DATA 9");
    CHECK(lines[33] == "SCALARS u double 1");
    CHECK(lines[44] == "CELL_DATA 8");
    CHECK(lines[45] == "SCALARS eta_bw double 1");
    CHECK(lines.size() == 55);

    std::ostringstream bare;
    io::write_vtk(bare, mesh);
    CHECK(bare.str().find("POINT_DATA") == std::string::npos);
    CHECK_THROWS_AS(io::write_vtk(bare, mesh, eta), DomainError);
}

TEST_CASE("eta csv round trip")
{
    const std::vector<double> eta{0.0, 1.0 / 3.0, 2.5e-300, 7.125};
    std::stringstream buffer;
    io::write_eta_csv(buffer, eta);
    CHECK(lines_of(buffer.str())[0] == "cell_index,eta");
    CHECK(io::read_eta_csv(buffer) == eta);
    std::istringstream bad("cell,eta\n0,1\n");
    CHECK_THROWS_AS(io::read_eta_csv(bad), DomainError);
    std::istringstream skipped("cell_index,eta\n0,1\n2,1\n");
    CHECK_THROWS_AS(io::read_eta_csv(skipped), DomainError);
}

TEST_CASE("coefficient csv")
{
    const RationalScheme scheme = build_scheme(0.5, 0.26, 1.0);
    std::ostringstream out;
    io::write_coefficients_csv(out, scheme);
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 150);
    CHECK(lines[0] == "l,weight,diffusion");
    CHECK(lines[1].rfind("-74,", 0) == 0);
    CHECK(lines[149].rfind("74,", 0) == 0);
    CHECK(lines[75].rfind("0,", 0) == 0);
    const auto comma = lines[75].find(',', 2);
    CHECK(std::stod(lines[75].substr(2, comma - 2)) == scheme.weights[74]);
    CHECK(lines[75].substr(comma + 1) == "1");
}

TEST_CASE("history csv round trip")
{
    const RunRecord record = sample_record();
    std::stringstream buffer;
    io::write_history_csv(buffer, record);
    const auto lines = lines_of(buffer.str());
    CHECK(lines[0] == "step,dofs,eta_global,exact_error,efficiency");
    CHECK(lines[2].substr(lines[2].size() - 2) == ",,");
    const auto steps = io::read_history_csv(buffer);
    REQUIRE(steps.size() == record.steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        CHECK(steps[i].step == record.steps[i].step);
        CHECK(steps[i].dofs == record.steps[i].dofs);
        CHECK(steps[i].eta == record.steps[i].eta);
        CHECK(steps[i].exact_error == record.steps[i].exact_error);
        CHECK(steps[i].efficiency == record.steps[i].efficiency);
    }
    std::istringstream bad("step,dofs\n");
    CHECK_THROWS_AS(io::read_history_csv(bad), DomainError);
    std::istringstream junk("step,dofs,eta_global,exact_error,efficiency\n0,81,abc,,\n");
    CHECK_THROWS_AS(io::read_history_csv(junk), DomainError);
}

TEST_CASE("history json round trip")
{
    const RunRecord record = sample_record();
    std::stringstream buffer;
    io::write_history_json(buffer, record);
    const nlohmann::json doc = nlohmann::json::parse(buffer.str());
    CHECK(doc.at("scheme").at("terms").get<int>() == 177);
    CHECK(doc.at("steps").at(1).at("exact_error").is_null());
    const RunRecord back = io::read_history_json(buffer);
    CHECK(back.problem == record.problem);
    CHECK(back.s == record.s);
    CHECK(back.kappa == record.kappa);
    CHECK(back.lambda0 == record.lambda0);
    CHECK(back.m_neg == record.m_neg);
    CHECK(back.n_pos == record.n_pos);
    CHECK(back.theta == record.theta);
    CHECK(back.refinement == record.refinement);
    CHECK(back.status == record.status);
    REQUIRE(back.steps.size() == record.steps.size());
    for (std::size_t i = 0; i < back.steps.size(); ++i) {
        CHECK(back.steps[i].dofs == record.steps[i].dofs);
        CHECK(back.steps[i].cells == record.steps[i].cells);
        CHECK(back.steps[i].eta == record.steps[i].eta);
        CHECK(back.steps[i].exact_error == record.steps[i].exact_error);
        CHECK(back.steps[i].efficiency == record.steps[i].efficiency);
        CHECK(back.steps[i].wall_seconds == record.steps[i].wall_seconds);
    }
}

}

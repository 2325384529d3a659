#include "fraclap/io.hpp"

#include "fraclap/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fraclap::io {

using nlohmann::json;

namespace {

// Shortest representation that parses back to the same double.
std::string format_double(double value)
{
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, end);
}

double parse_double(const std::string& text)
{
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
        throw DomainError("malformed number '" + text + "'");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

std::string optional_field(const std::optional<double>& value) { return value ? format_double(*value) : ""; }

} // namespace

void write_mesh_json(std::ostream& out, const Mesh& mesh, std::span<const double> solution)
{
    json doc;
    json vertices = json::array();
    for (const Point& p : mesh.vertices())
        vertices.push_back({p.x, p.y});
    json cells = json::array();
    for (const auto& c : mesh.cells())
        cells.push_back({c[0], c[1], c[2]});
    doc["vertices"] = std::move(vertices);
    doc["cells"] = std::move(cells);
    doc["refinement_edges"] = mesh.refinement_edges();
    if (!solution.empty())
        doc["u"] = std::vector<double>(solution.begin(), solution.end());
    out << doc.dump() << '\n';
}

Mesh read_mesh_json(std::istream& in)
{
    const json doc = json::parse(in);
    std::vector<Point> vertices;
    for (const auto& v : doc.at("vertices"))
        vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    std::vector<std::array<int, 3>> cells;
    for (const auto& c : doc.at("cells"))
        cells.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
    std::vector<int> tags;
    if (doc.contains("refinement_edges"))
        tags = doc.at("refinement_edges").get<std::vector<int>>();
    return Mesh(std::move(vertices), std::move(cells), std::move(tags));
}

void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const double> u, std::span<const double> eta)
{
    if (!u.empty() && u.size() != mesh.num_vertices())
        throw DomainError("write_vtk: point field size does not match the vertex count");
    if (!eta.empty() && eta.size() != mesh.num_cells())
        throw DomainError("write_vtk: cell field size does not match the cell count");
    out << "# vtk DataFile Version 3.0\n"
        << "fractional Laplacian solution\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    out << std::setprecision(17);
    for (const Point& p : mesh.vertices())
        out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
    for (const auto& c : mesh.cells())
        out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << "CELL_TYPES " << mesh.num_cells() << '\n';
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        out << "5\n";
    if (!u.empty()) {
        out << "POINT_DATA " << mesh.num_vertices() << '\n' << "SCALARS u double 1\nLOOKUP_TABLE default\n";
        for (double v : u)
            out << v << '\n';
    }
    if (!eta.empty()) {
        out << "CELL_DATA " << mesh.num_cells() << '\n' << "SCALARS eta_bw double 1\nLOOKUP_TABLE default\n";
        for (double v : eta)
            out << v << '\n';
    }
}

void write_eta_csv(std::ostream& out, std::span<const double> eta)
{
    out << "cell_index,eta\n";
    for (std::size_t c = 0; c < eta.size(); ++c)
        out << c << ',' << format_double(eta[c]) << '\n';
}

std::vector<double> read_eta_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "cell_index,eta")
        throw DomainError("eta csv: missing header");
    std::vector<double> eta;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2 || std::stoul(fields[0]) != eta.size())
            throw DomainError("eta csv: malformed row '" + line + "'");
        eta.push_back(parse_double(fields[1]));
    }
    return eta;
}

void write_coefficients_csv(std::ostream& out, const RationalScheme& scheme)
{
    out << "l,weight,diffusion\n";
    for (std::size_t i = 0; i < scheme.size(); ++i)
        out << scheme.index_at(i) << ',' << format_double(scheme.weights[i]) << ','
            << format_double(scheme.diffusion[i]) << '\n';
}

void write_history_csv(std::ostream& out, const RunRecord& record)
{
    out << "step,dofs,eta_global,exact_error,efficiency\n";
    for (const StepRecord& s : record.steps)
        out << s.step << ',' << s.dofs << ',' << format_double(s.eta) << ',' << optional_field(s.exact_error) << ','
            << optional_field(s.efficiency) << '\n';
}

std::vector<StepRecord> read_history_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "step,dofs,eta_global,exact_error,efficiency")
        throw DomainError("history csv: missing header");
    std::vector<StepRecord> steps;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw DomainError("history csv: malformed row '" + line + "'");
        StepRecord s;
        s.step = std::stoi(fields[0]);
        s.dofs = std::stoul(fields[1]);
        s.eta = parse_double(fields[2]);
        if (!fields[3].empty())
            s.exact_error = parse_double(fields[3]);
        if (!fields[4].empty())
            s.efficiency = parse_double(fields[4]);
        steps.push_back(s);
    }
    return steps;
}

void write_history_json(std::ostream& out, const RunRecord& record)
{
    json doc;
    doc["problem"] = record.problem;
    doc["scheme"] = {{"s", record.s},
                     {"kappa", record.kappa},
                     {"lambda0", record.lambda0},
                     {"m_neg", record.m_neg},
                     {"n_pos", record.n_pos},
                     {"terms", record.m_neg + record.n_pos + 1}};
    doc["theta"] = record.theta;
    doc["refinement"] = to_string(record.refinement);
    doc["status"] = record.status;
    json steps = json::array();
    for (const StepRecord& s : record.steps) {
        json entry = {{"step", s.step},
                      {"dofs", s.dofs},
                      {"cells", s.cells},
                      {"eta_global", s.eta},
                      {"wall_seconds", s.wall_seconds}};
        entry["exact_error"] = s.exact_error ? json(*s.exact_error) : json(nullptr);
        entry["efficiency"] = s.efficiency ? json(*s.efficiency) : json(nullptr);
        steps.push_back(std::move(entry));
    }
    doc["steps"] = std::move(steps);
    out << doc.dump(2) << '\n';
}

RunRecord read_history_json(std::istream& in)
{
    const json doc = json::parse(in);
    RunRecord record;
    record.problem = doc.at("problem").get<std::string>();
    const json& scheme = doc.at("scheme");
    record.s = scheme.at("s").get<double>();
    record.kappa = scheme.at("kappa").get<double>();
    record.lambda0 = scheme.at("lambda0").get<double>();
    record.m_neg = scheme.at("m_neg").get<int>();
    record.n_pos = scheme.at("n_pos").get<int>();
    record.theta = doc.at("theta").get<double>();
    record.refinement = refinement_from_string(doc.at("refinement").get<std::string>());
    record.status = doc.at("status").get<std::string>();
    for (const json& entry : doc.at("steps")) {
        StepRecord s;
        s.step = entry.at("step").get<int>();
        s.dofs = entry.at("dofs").get<std::size_t>();
        s.cells = entry.at("cells").get<std::size_t>();
        s.eta = entry.at("eta_global").get<double>();
        s.wall_seconds = entry.at("wall_seconds").get<double>();
        if (!entry.at("exact_error").is_null())
            s.exact_error = entry.at("exact_error").get<double>();
        if (!entry.at("efficiency").is_null())
            s.efficiency = entry.at("efficiency").get<double>();
        record.steps.push_back(s);
    }
    return record;
}

} // namespace fraclap::io

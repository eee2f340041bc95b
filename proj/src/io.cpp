#include "binls/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace binls {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

fs::path temp_sibling(const fs::path& path) {
    fs::path tmp = path;
    tmp += ".tmp";
    return tmp;
}

void rename_over(const fs::path& tmp, const fs::path& path) {
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("atomic write failed for " + path.string());
}

}  // namespace

void atomic_write_text(const fs::path& path, const std::string& text) {
    const fs::path tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    rename_over(tmp, path);
}

void atomic_write_bytes(const fs::path& path, const void* data, std::size_t bytes) {
    const fs::path tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    rename_over(tmp, path);
}

void write_field_dump(const fs::path& base, const RealField& f) {
    f.grid.validate();
    if (!all_finite(f)) throw std::runtime_error("write_field_dump: non-finite samples");
    json header = {{"dimension", f.grid.dimension},
                   {"points_per_axis", f.grid.points_per_axis},
                   {"box_length", f.grid.box_length},
                   {"dtype", "f64-le"}};
    fs::path hpath = base;
    hpath += ".json";
    atomic_write_text(hpath, header.dump(2) + "\n");
    fs::path bpath = base;
    bpath += ".bin";
    atomic_write_bytes(bpath, f.samples.data(), f.samples.size() * sizeof(double));
}

RealField read_field_dump(const fs::path& base) {
    fs::path hpath = base;
    hpath += ".json";
    std::ifstream in(hpath);
    if (!in) throw std::runtime_error("cannot open " + hpath.string());
    json header = json::parse(in);
    if (header.at("dtype").get<std::string>() != "f64-le")
        throw std::runtime_error("field dump: unsupported dtype");
    GridSpec g;
    g.dimension = header.at("dimension").get<int>();
    g.points_per_axis = header.at("points_per_axis").get<int>();
    g.box_length = header.at("box_length").get<double>();
    g.validate();

    RealField f(g);
    fs::path bpath = base;
    bpath += ".bin";
    std::ifstream bin(bpath, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + bpath.string());
    bin.read(reinterpret_cast<char*>(f.samples.data()),
             static_cast<std::streamsize>(f.samples.size() * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != f.samples.size() * sizeof(double))
        throw std::runtime_error("field dump: sample count mismatch in " + bpath.string());
    if (!all_finite(f)) throw std::runtime_error("field dump: non-finite samples");
    return f;
}

nlohmann::json params_to_json(const SystemParams& params) {
    return json{{"dimension", params.dimension}, {"alpha1", params.alpha1},
                {"alpha2", params.alpha2},       {"beta", params.beta},
                {"r1", params.r1},               {"r2", params.r2},
                {"rho", params.rho}};
}

SystemParams params_from_json(const json& j) {
    SystemParams p;
    p.dimension = j.at("dimension").get<int>();
    p.alpha1 = j.at("alpha1").get<double>();
    p.alpha2 = j.at("alpha2").get<double>();
    p.beta = j.at("beta").get<double>();
    p.r1 = j.at("r1").get<double>();
    p.r2 = j.at("r2").get<double>();
    p.rho = j.at("rho").get<double>();
    p.validate();
    return p;
}

nlohmann::json grid_to_json(const GridSpec& grid) {
    return json{{"dimension", grid.dimension},
                {"points_per_axis", grid.points_per_axis},
                {"box_length", grid.box_length}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.dimension = j.at("dimension").get<int>();
    g.points_per_axis = j.at("points_per_axis").get<int>();
    g.box_length = j.at("box_length").get<double>();
    g.validate();
    return g;
}

void write_state_pair(const fs::path& base, const StatePair& p,
                      const SystemParams& params) {
    fs::path ubase = base;
    ubase += ".u";
    fs::path vbase = base;
    vbase += ".v";
    write_field_dump(ubase, p.u);
    write_field_dump(vbase, p.v);
    json manifest = {{"params", params_to_json(params)},
                     {"total_mass", total_mass(p)},
                     {"energy_I", energy_I(p, params)},
                     {"lambda_estimate", multiplier_estimate(p, params)}};
    fs::path mpath = base;
    mpath += ".manifest.json";
    atomic_write_text(mpath, manifest.dump(2) + "\n");
}

LoadedState read_state_pair(const fs::path& base) {
    fs::path mpath = base;
    mpath += ".manifest.json";
    std::ifstream in(mpath);
    if (!in) throw std::runtime_error("cannot open " + mpath.string());
    json manifest = json::parse(in);
    LoadedState loaded;
    loaded.params = params_from_json(manifest.at("params"));
    fs::path ubase = base;
    ubase += ".u";
    fs::path vbase = base;
    vbase += ".v";
    loaded.state.u = read_field_dump(ubase);
    loaded.state.v = read_field_dump(vbase);
    if (!(loaded.state.u.grid == loaded.state.v.grid))
        throw std::runtime_error("state pair: component grids differ");
    return loaded;
}

}  // namespace binls

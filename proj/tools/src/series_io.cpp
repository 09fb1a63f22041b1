// SPDX-License-Identifier: Apache-2.0
#include "tvtr/series_io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace tvtr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view role_name(SeriesRole r) noexcept {
    return r == SeriesRole::covariate ? "covariate" : "response";
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

char mode_letter(SeriesRole r) { return r == SeriesRole::covariate ? 'p' : 'q'; }

fs::path payload_path(const fs::path& manifest, const std::string& name) {
    return manifest.parent_path() / name;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw IoError(where + ": cannot parse '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void write_series(const fs::path& manifest, const TensorSeries& s) {
    if (s.series.empty()) throw ConfigError("write_series: no subjects");
    if (s.time_grids.size() != s.series.size()) {
        throw ConfigError("write_series: time grid count differs from subject count");
    }
    const Shape& full = s.series.front().shape();
    const Shape modes(full.begin() + 1, full.end());
    const std::size_t j = full.front();
    const std::size_t m = shape_size(modes);
    const char letter = mode_letter(s.role);

    std::string csv = "subject_id,time_index";
    for (std::size_t d = 0; d < modes.size(); ++d) csv += "," + std::string(1, letter) + std::to_string(d + 1);
    csv += ",value\n";
    Shape idx(modes.size(), 0);
    for (std::size_t i = 0; i < s.series.size(); ++i) {
        if (s.series[i].shape() != full) throw ConfigError("write_series: subject shapes differ");
        const auto mat = s.series[i].as_matrix(j);
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t jj = 0; jj < j; ++jj) {
                csv += std::to_string(i + 1);
                csv += ',';
                csv += std::to_string(jj + 1);
                for (const auto v : idx) {
                    csv += ',';
                    csv += std::to_string(v + 1);
                }
                csv += ',';
                csv += format_double(mat(static_cast<Eigen::Index>(jj), static_cast<Eigen::Index>(k)));
                csv += '\n';
            }
            next_index(idx, modes);
        }
    }

    json man;
    man["schema_version"] = kSeriesSchemaVersion;
    man["role"] = std::string(role_name(s.role));
    man["subjects"] = s.series.size();
    man["time_points"] = j;
    man["mode_shape"] = modes;
    man["domain_end"] = s.domain_end;
    bool shared = true;
    for (const auto& g : s.time_grids) shared = shared && g == s.time_grids.front();
    if (shared) {
        man["time_grid"] = s.time_grids.front();
    } else {
        man["time_grids"] = s.time_grids;
    }
    const std::string payload = manifest.stem().string() + ".csv";
    man["payload"] = payload;
    write_text(payload_path(manifest, payload), csv);
    write_text(manifest, man.dump(2) + "\n");
}

TensorSeries read_series(const fs::path& manifest) {
    json man;
    try {
        man = json::parse(read_text(manifest));
    } catch (const json::exception& e) {
        throw IoError(manifest.string() + ": invalid JSON: " + e.what());
    }
    TensorSeries s;
    std::size_t n = 0;
    std::size_t j = 0;
    Shape modes;
    std::string payload;
    try {
        if (man.at("schema_version").get<int>() != kSeriesSchemaVersion) {
            throw IoError(manifest.string() + ": unsupported schema_version");
        }
        const auto role = man.at("role").get<std::string>();
        if (role == "covariate") {
            s.role = SeriesRole::covariate;
        } else if (role == "response") {
            s.role = SeriesRole::response;
        } else {
            throw IoError(manifest.string() + ": unknown role '" + role + "'");
        }
        n = man.at("subjects").get<std::size_t>();
        j = man.at("time_points").get<std::size_t>();
        modes = man.at("mode_shape").get<Shape>();
        s.domain_end = man.value("domain_end", 1.0);
        if (man.contains("time_grid")) {
            s.time_grids.assign(n, man.at("time_grid").get<std::vector<double>>());
        } else {
            s.time_grids = man.at("time_grids").get<std::vector<std::vector<double>>>();
        }
        payload = man.at("payload").get<std::string>();
    } catch (const json::exception& e) {
        throw IoError(manifest.string() + ": bad manifest: " + e.what());
    }
    if (n == 0 || j == 0) throw IoError(manifest.string() + ": empty series");
    if (s.time_grids.size() != n) throw IoError(manifest.string() + ": time grid count != subjects");
    for (const auto& g : s.time_grids) {
        if (g.size() != j) throw IoError(manifest.string() + ": time grid length != time_points");
    }

    Shape full{j};
    full.insert(full.end(), modes.begin(), modes.end());
    const std::size_t m = shape_size(modes);
    s.series.assign(n, DenseTensor(full));
    std::vector<char> seen(n * j * m, 0);

    const fs::path csv_path = payload_path(manifest, payload);
    const std::string text = read_text(csv_path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(csv_path.string() + ": empty payload");
    const std::size_t cols = 3 + modes.size();
    if (split(line).size() != cols) throw IoError(csv_path.string() + ": header has wrong column count");
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        const std::string where = csv_path.string() + ":" + std::to_string(line_no);
        if (f.size() != cols) throw IoError(where + ": wrong column count");
        const auto i = parse_number<std::size_t>(f[0], where);
        const auto t = parse_number<std::size_t>(f[1], where);
        if (i < 1 || i > n || t < 1 || t > j) throw IoError(where + ": index out of range");
        std::size_t lin = 0;
        std::size_t stride = 1;
        for (std::size_t d = 0; d < modes.size(); ++d) {
            const auto k = parse_number<std::size_t>(f[2 + d], where);
            if (k < 1 || k > modes[d]) throw IoError(where + ": mode index out of range");
            lin += (k - 1) * stride;
            stride *= modes[d];
        }
        const double v = parse_number<double>(f.back(), where);
        const std::size_t key = (i - 1) + n * ((t - 1) + j * lin);
        if (seen[key]) throw IoError(where + ": duplicate entry");
        seen[key] = 1;
        s.series[i - 1].data()[(t - 1) + j * lin] = v;
        ++rows;
    }
    if (rows != n * j * m) {
        throw IoError(csv_path.string() + ": expected " + std::to_string(n * j * m) + " rows, found " +
                      std::to_string(rows));
    }
    return s;
}

ObservationSet read_observations(const fs::path& covariates, const fs::path& responses) {
    TensorSeries x = read_series(covariates);
    TensorSeries y = read_series(responses);
    if (x.role != SeriesRole::covariate) throw ConfigError(covariates.string() + ": role is not covariate");
    if (y.role != SeriesRole::response) throw ConfigError(responses.string() + ": role is not response");
    if (x.series.size() != y.series.size()) {
        throw ConfigError("covariate and response files have different subject counts");
    }
    if (x.series.front().dim(0) != y.series.front().dim(0)) {
        throw ConfigError("covariate and response files have different time_points (J)");
    }
    if (x.time_grids != y.time_grids) throw ConfigError("covariate and response time grids differ");
    if (x.domain_end != y.domain_end) throw ConfigError("covariate and response domains differ");
    ObservationSet obs;
    obs.domain_end = x.domain_end;
    obs.time_grids = std::move(x.time_grids);
    obs.covariates = std::move(x.series);
    obs.responses = std::move(y.series);
    try {
        obs.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return obs;
}

void write_observations(const fs::path& dir, const ObservationSet& obs) {
    write_series(dir / "covariates.json",
                 TensorSeries{SeriesRole::covariate, obs.domain_end, obs.time_grids, obs.covariates});
    write_series(dir / "responses.json",
                 TensorSeries{SeriesRole::response, obs.domain_end, obs.time_grids, obs.responses});
}

}  // namespace tvtr::cli

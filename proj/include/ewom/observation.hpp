#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ewom/csv.hpp"
#include "ewom/error.hpp"

namespace ewom {

/// Rows are establishments, columns are variables (per-topic counts followed by sales).
struct ObservationMatrix {
    std::vector<std::string> station_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows x columns

    std::size_t rows() const noexcept { return station_ids.size(); }

    std::ptrdiff_t column_index(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return static_cast<std::ptrdiff_t>(j);
        return -1;
    }
};

inline void save_observations(const ObservationMatrix& obs, const std::filesystem::path& path) {
    csv::Writer w(path);
    std::vector<std::string> header{"station_id"};
    header.insert(header.end(), obs.columns.begin(), obs.columns.end());
    w.row(header);
    for (std::size_t i = 0; i < obs.rows(); ++i) {
        std::vector<std::string> row{obs.station_ids[i]};
        for (Eigen::Index j = 0; j < obs.values.cols(); ++j)
            row.push_back(csv::format_double(obs.values(static_cast<Eigen::Index>(i), j)));
        w.row(row);
    }
}

inline ObservationMatrix load_observations(const std::filesystem::path& path) {
    const auto rows = csv::read(path);
    if (rows.empty()) throw ContractError(path.string() + ": missing header");
    const auto& header = rows.front().fields;
    if (header.size() < 2 || header[0] != "station_id")
        throw ContractError(path.string() + ": header must start with station_id and name at least one variable");
    ObservationMatrix obs;
    obs.columns.assign(header.begin() + 1, header.end());
    const auto d = static_cast<Eigen::Index>(obs.columns.size());
    obs.values.resize(static_cast<Eigen::Index>(rows.size() - 1), d);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const std::string where = path.string() + ":" + std::to_string(rows[r].line);
        if (f.size() != header.size()) throw ContractError(where + ": wrong number of fields");
        obs.station_ids.push_back(f[0]);
        for (Eigen::Index j = 0; j < d; ++j)
            obs.values(static_cast<Eigen::Index>(r - 1), j) = csv::parse_double(f[static_cast<std::size_t>(j) + 1], where);
    }
    return obs;
}

/// Square matrix dump with a `variable` header column.
inline void save_matrix(const Eigen::MatrixXd& M, const std::vector<std::string>& names,
                        const std::filesystem::path& path) {
    csv::Writer w(path);
    std::vector<std::string> header{"variable"};
    header.insert(header.end(), names.begin(), names.end());
    w.row(header);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        std::vector<std::string> row{names[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(csv::format_double(M(i, j)));
        w.row(row);
    }
}

}  // namespace ewom

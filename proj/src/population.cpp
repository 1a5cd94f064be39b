#include "hierid/population.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hierid/csv.hpp"
#include "hierid/errors.hpp"
#include "hierid/rng.hpp"

namespace hierid {

Transform transform_from_string(const std::string& s) {
    if (s == "log") return Transform::Log;
    if (s == "log10") return Transform::Log10;
    if (s == "identity") return Transform::Identity;
    throw_schema("unknown transform '" + s + "' (expected log, log10, identity)");
}

std::string to_string(Transform t) {
    switch (t) {
        case Transform::Log: return "log";
        case Transform::Log10: return "log10";
        case Transform::Identity: return "identity";
    }
    return "?";
}

double apply_transform(Transform t, double linear) {
    switch (t) {
        case Transform::Log:
            if (!(linear > 0)) throw_input("log transform requires a positive value");
            return std::log(linear);
        case Transform::Log10:
            if (!(linear > 0)) throw_input("log10 transform requires a positive value");
            return std::log10(linear);
        case Transform::Identity: return linear;
    }
    return linear;
}

double invert_transform(Transform t, double transformed) {
    switch (t) {
        case Transform::Log: return std::exp(transformed);
        case Transform::Log10: return std::pow(10.0, transformed);
        case Transform::Identity: return transformed;
    }
    return transformed;
}

void PopulationDistribution::validate() const {
    if (name.empty()) throw_schema("population distribution without a name");
    if (!(spread >= 0)) throw_schema("distribution '" + name + "': spread must be >= 0");
    if (!std::isfinite(location)) throw_schema("distribution '" + name + "': non-finite location");
}

void StudyDesign::validate() const {
    if (n_individuals < 1) throw_schema("design: n_individuals must be >= 1");
    for (double t : obs_times)
        if (t < 0 || t > horizon) throw_schema("design: observation time outside [0, horizon]");
    for (std::size_t i = 0; i + 1 < obs_times.size(); ++i)
        if (!(obs_times[i] < obs_times[i + 1]))
            throw_schema("design: obs_times must be strictly increasing");
    for (const auto& d : doses) {
        if (d.time < 0 || d.time > horizon) throw_schema("design: dose time outside [0, horizon]");
        if (d.amount < 0) throw_schema("design: negative dose amount");
    }
}

std::vector<int> TrialDataset::individual_ids() const {
    std::vector<int> ids;
    for (const auto& row : rows)
        if (ids.empty() || ids.back() != row.id) ids.push_back(row.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

void TrialDataset::validate() const {
    std::set<std::pair<int, double>> seen;
    for (const auto& row : rows) {
        if (!std::isfinite(row.y))
            throw_schema("dataset: non-finite observation for individual " +
                         std::to_string(row.id));
        if (!seen.insert({row.id, row.time}).second)
            throw_schema("dataset: duplicate (id, time) pair: id=" + std::to_string(row.id) +
                         ", t=" + fmt_double(row.time));
    }
}

std::vector<Individual> sample_population(const std::vector<PopulationDistribution>& dists, int n,
                                          std::uint64_t seed) {
    if (n < 1) throw_input("sample_population: n must be >= 1");
    for (const auto& d : dists) d.validate();

    std::vector<Individual> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int id = 1; id <= n; ++id) {
        Rng rng = Rng::substream(seed, {0x706f70ULL /*pop*/, static_cast<std::uint64_t>(id)});
        Individual ind;
        ind.id = id;
        for (const auto& d : dists) {
            const double psi = d.spread > 0 ? rng.normal(0.0, d.spread) : 0.0;
            ind.random_effects[d.name] = psi;
            ind.params[d.name] = d.individual_value(psi);
        }
        out.push_back(std::move(ind));
    }
    return out;
}

TrialDataset generate_synthetic(const Structural& structural, const NamedValues& constants,
                                const std::vector<Individual>& individuals,
                                const StudyDesign& design, std::uint64_t seed) {
    design.validate();
    TrialDataset data;
    data.seed = seed;

    std::vector<DoseEvent> doses = design.doses;
    for (auto& d : doses) d.target = structural.dose_target();
    std::sort(doses.begin(), doses.end(),
              [](const DoseEvent& a, const DoseEvent& b) { return a.time < b.time; });

    for (const auto& ind : individuals) {
        const auto params = assemble_params(structural, ind.params, constants);
        std::vector<double> f;
        try {
            f = structural.predict(params, design.obs_times, doses);
        } catch (const Error& e) {
            throw Error(e.kind(), "simulation failed for individual " + std::to_string(ind.id) +
                                      ": " + e.what());
        }

        Rng rng = Rng::substream(seed, {0x6e6f697365ULL /*noise*/,
                                        static_cast<std::uint64_t>(ind.id)});
        for (std::size_t j = 0; j < design.obs_times.size(); ++j) {
            double y = f[j];
            switch (design.noise.kind) {
                case NoiseKind::None: break;
                case NoiseKind::AdditiveLog10: y += design.noise.value * rng.normal(); break;
                case NoiseKind::Proportional: {
                    y = f[j] * (1.0 + design.noise.value * rng.normal());
                    if (!(y > 0))
                        throw_numerical("proportional noise produced a non-positive observation"
                                        " for individual " +
                                        std::to_string(ind.id));
                    break;
                }
            }
            data.rows.push_back({ind.id, design.obs_times[j], y});
        }
        data.doses[ind.id] = doses;
    }
    data.validate();
    return data;
}

void write_dataset_csv(const TrialDataset& data, const std::filesystem::path& path) {
    CsvTable table;
    table.header = {"ID", "TIME", "Y", "AMT", "EVID"};

    // Group rows per individual, interleaving dose rows in time order
    // (dose before observation at equal times, matching EVID conventions).
    for (int id : data.individual_ids()) {
        std::vector<const ObservationRow*> obs;
        for (const auto& row : data.rows)
            if (row.id == id) obs.push_back(&row);
        std::vector<DoseEvent> doses;
        if (auto it = data.doses.find(id); it != data.doses.end()) doses = it->second;

        std::size_t oi = 0, di = 0;
        while (oi < obs.size() || di < doses.size()) {
            const bool take_dose =
                di < doses.size() && (oi >= obs.size() || doses[di].time <= obs[oi]->time);
            if (take_dose) {
                table.rows.push_back({std::to_string(id), fmt_double(doses[di].time), "",
                                      fmt_double(doses[di].amount), "1"});
                ++di;
            } else {
                table.rows.push_back({std::to_string(id), fmt_double(obs[oi]->time),
                                      fmt_double(obs[oi]->y), "", "0"});
                ++oi;
            }
        }
    }
    write_csv(path, table);
}

TrialDataset read_dataset_csv(const std::filesystem::path& path, int dose_target) {
    const CsvTable table = read_csv(path);
    for (const char* col : {"ID", "TIME", "Y", "AMT", "EVID"})
        if (table.column(col) < 0)
            throw_schema("dataset " + path.string() + ": missing column '" + std::string(col) +
                         "'");
    const auto id_c = static_cast<std::size_t>(table.column("ID"));
    const auto time_c = static_cast<std::size_t>(table.column("TIME"));
    const auto y_c = static_cast<std::size_t>(table.column("Y"));
    const auto amt_c = static_cast<std::size_t>(table.column("AMT"));
    const auto evid_c = static_cast<std::size_t>(table.column("EVID"));

    TrialDataset data;
    for (const auto& row : table.rows) {
        const int id = static_cast<int>(parse_double(row[id_c]));
        const double time = parse_double(row[time_c]);
        if (row[evid_c] == "1") {
            data.doses[id].push_back({time, parse_double(row[amt_c]), dose_target});
        } else if (row[evid_c] == "0") {
            data.rows.push_back({id, time, parse_double(row[y_c])});
        } else {
            throw_schema("dataset " + path.string() + ": unsupported EVID '" + row[evid_c] + "'");
        }
    }
    for (auto& [id, doses] : data.doses)
        std::sort(doses.begin(), doses.end(),
                  [](const DoseEvent& a, const DoseEvent& b) { return a.time < b.time; });
    data.validate();
    return data;
}

void write_truth_csv(const std::vector<Individual>& individuals,
                     const std::filesystem::path& path) {
    CsvTable table;
    table.header = {"ID"};
    if (!individuals.empty())
        for (const auto& [name, _] : individuals.front().params) table.header.push_back(name);
    for (const auto& ind : individuals) {
        std::vector<std::string> row = {std::to_string(ind.id)};
        for (const auto& [name, value] : ind.params) row.push_back(fmt_double(value));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

}  // namespace hierid

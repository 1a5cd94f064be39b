#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hierid/structural.hpp"

namespace hierid {

enum class Transform { Log, Log10, Identity };

Transform transform_from_string(const std::string& s);
std::string to_string(Transform t);

double apply_transform(Transform t, double linear);     // linear -> transformed
double invert_transform(Transform t, double transformed);  // transformed -> linear

// One parameter's population law: Normal(location, spread^2) on the
// transformed scale; spread 0 marks a fixed effect.
struct PopulationDistribution {
    std::string name;
    Transform transform = Transform::Log;
    double location = 0.0;  // transformed scale
    double spread = 0.0;    // transformed-scale SD

    // Linear-scale individual value for random effect psi.
    double individual_value(double psi) const { return invert_transform(transform, location + psi); }

    void validate() const;
};

struct Individual {
    int id = 0;
    NamedValues params;          // linear scale
    NamedValues random_effects;  // psi, transformed scale
};

enum class NoiseKind { None, AdditiveLog10, Proportional };

struct NoiseModel {
    NoiseKind kind = NoiseKind::None;
    double value = 0.0;  // SD for additive, coefficient b for proportional
};

struct StudyDesign {
    double horizon = 0.0;  // days
    std::vector<double> obs_times;
    std::vector<DoseEvent> doses;  // administered identically to every individual
    NoiseModel noise;
    int n_individuals = 1;

    void validate() const;
};

struct ObservationRow {
    int id = 0;
    double time = 0.0;
    double y = 0.0;
};

struct TrialDataset {
    std::vector<ObservationRow> rows;
    std::map<int, std::vector<DoseEvent>> doses;
    std::uint64_t seed = 0;

    std::vector<int> individual_ids() const;
    void validate() const;
};

// Draws n individuals; psi ~ N(0, spread^2) independently per parameter, from
// a substream keyed by (seed, individual id).
std::vector<Individual> sample_population(const std::vector<PopulationDistribution>& dists, int n,
                                          std::uint64_t seed);

// Simulates every individual over the design and applies the noise law.
// `constants` supplies the structural parameters not carried by individuals.
TrialDataset generate_synthetic(const Structural& structural, const NamedValues& constants,
                                const std::vector<Individual>& individuals,
                                const StudyDesign& design, std::uint64_t seed);

// Dataset file layout: ID,TIME,Y,AMT,EVID.  Observation rows have EVID=0 and
// empty AMT; dose rows have EVID=1, AMT set, and empty Y.
void write_dataset_csv(const TrialDataset& data, const std::filesystem::path& path);
TrialDataset read_dataset_csv(const std::filesystem::path& path, int dose_target = 0);

// True individual parameters, one row per individual.
void write_truth_csv(const std::vector<Individual>& individuals,
                     const std::filesystem::path& path);

}  // namespace hierid

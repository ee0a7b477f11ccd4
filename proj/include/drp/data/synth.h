//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_DATA_SYNTH_H_
#define DRP_DATA_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "drp/data/expression.h"
#include "drp/data/response.h"

namespace drp::data {

struct SynthConfig {
  std::uint64_t seed = 7;
  int n_lines = 51;
  // Informative CGC genes; every one of them passes the expression filters.
  int n_genes = 597;
  int n_drugs = 40;
  int n_archetypes = 8;
  int n_families = 8;
  double noise_sd = 0.3;
  // Fraction of (line, drug) pairs left unmeasured.
  double drop_fraction = 0.1;
  // Distractors. CGC genes failing the mean or spread filter, non-CGC genes
  // that pass the filters but carry no signal, and non-CGC genes that fail.
  int n_cgc_low_mean = 60;
  int n_cgc_low_std = 40;
  int n_noise_genes = 400;
  int n_noise_low = 100;
};

// Parameters of the planted response
//   ln IC50 = intercept + family_base[f] + drug_offset[d]
//           + <archetype_factor[a], family_factor[f]>
//           + smooth_weight * line_smooth[l] * family_smooth[f] + noise.
struct PlantedFunction {
  double intercept = 0.0;
  double smooth_weight = 0.0;
  std::vector<std::vector<double>> archetype_factor;
  std::vector<std::vector<double>> family_factor;
  std::vector<double> family_base;
  std::vector<double> family_smooth;
  std::vector<double> drug_offset;
  std::vector<double> line_smooth;

  double Evaluate(int line, int archetype, int drug, int family) const;
};

struct SyntheticData {
  SynthConfig config;
  ExpressionMatrix expression;
  std::set<std::string> cgc;
  std::vector<DrugEntry> drugs;
  std::vector<int> drug_family;
  std::vector<std::string> drug_substituent;
  std::vector<int> line_archetype;
  std::vector<GdscRow> responses;
  // Noise-free planted value for each response row.
  std::vector<double> planted;
  PlantedFunction truth;
};

// Deterministic for a fixed config. Throws DomainError when a size is < 2.
SyntheticData Synthesize(const SynthConfig &config);

// Writes expression.csv, cgc.txt, drugs.csv, gdsc.csv, truth.csv and
// corpus.smi into dir (created if absent). Returns the written paths.
std::vector<std::filesystem::path> WriteSynthetic(const std::filesystem::path &dir,
                                                  const SyntheticData &data);

// Tissue labels used for the archetypes, in archetype order.
const std::vector<std::string> &SyntheticTissues();

}  // namespace drp::data

#endif  // DRP_DATA_SYNTH_H_

// Copyright 2026 The rprct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rprct/dataset.hpp"

#include <algorithm>
#include <sstream>

#include "rprct/status.hpp"

namespace rprct {

std::string CovariateKindName(CovariateKind kind) {
  switch (kind) {
    case CovariateKind::kBinary:
      return "binary";
    case CovariateKind::kCategorical:
      return "categorical";
    case CovariateKind::kNumeric:
      return "numeric";
  }
  return "numeric";
}

CovariateKind ParseCovariateKind(const std::string& name) {
  if (name == "binary") return CovariateKind::kBinary;
  if (name == "categorical") return CovariateKind::kCategorical;
  if (name == "numeric") return CovariateKind::kNumeric;
  Fail(ErrorCode::kSchema, "unknown covariate kind '" + name +
                               "' (expected binary, categorical or numeric)");
}

std::size_t Covariate::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), IsMissing));
}

bool operator==(const Covariate& a, const Covariate& b) {
  if (a.name != b.name || a.kind != b.kind || a.levels != b.levels ||
      a.values.size() != b.values.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool ma = Covariate::IsMissing(a.values[i]);
    const bool mb = Covariate::IsMissing(b.values[i]);
    if (ma != mb || (!ma && a.values[i] != b.values[i])) return false;
  }
  return true;
}

PrivateDataset::PrivateDataset(std::vector<std::uint8_t> y_tilde,
                               std::vector<std::uint8_t> a,
                               std::vector<std::uint8_t> s,
                               std::vector<Covariate> covariates,
                               std::vector<std::string> ids)
    : y_tilde_(std::move(y_tilde)),
      a_(std::move(a)),
      s_(std::move(s)),
      covariates_(std::move(covariates)),
      ids_(std::move(ids)) {
  const std::size_t n = y_tilde_.size();
  Require(a_.size() == n && s_.size() == n, ErrorCode::kInvalidArgument,
          "y_tilde, a and s must have the same length");
  Require(ids_.empty() || ids_.size() == n, ErrorCode::kInvalidArgument,
          "id column length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (y_tilde_[i] > 1 || a_[i] > 1 || (s_[i] != 1 && s_[i] != 2)) {
      std::ostringstream msg;
      msg << "row " << i << ": need y_tilde, a in {0,1} and s in {1,2}";
      Fail(ErrorCode::kSchema, msg.str());
    }
  }
  for (const auto& c : covariates_) {
    Require(c.values.size() == n, ErrorCode::kInvalidArgument,
            "covariate '" + c.name + "' length mismatch");
  }
}

PrivateDataset PrivateDataset::Select(std::span<const std::size_t> rows,
                                      bool with_covariates) const {
  PrivateDataset out;
  out.y_tilde_.reserve(rows.size());
  out.a_.reserve(rows.size());
  out.s_.reserve(rows.size());
  for (std::size_t r : rows) {
    out.y_tilde_.push_back(y_tilde_[r]);
    out.a_.push_back(a_[r]);
    out.s_.push_back(s_[r]);
  }
  if (!ids_.empty()) {
    out.ids_.reserve(rows.size());
    for (std::size_t r : rows) out.ids_.push_back(ids_[r]);
  }
  if (with_covariates) {
    out.covariates_.reserve(covariates_.size());
    for (const auto& c : covariates_) {
      Covariate copy{c.name, c.kind, c.levels, {}};
      copy.values.reserve(rows.size());
      for (std::size_t r : rows) copy.values.push_back(c.values[r]);
      out.covariates_.push_back(std::move(copy));
    }
  }
  return out;
}

PrivateDataset PrivateDataset::SwapSubsamples() const {
  PrivateDataset out = *this;
  for (auto& s : out.s_) s = static_cast<std::uint8_t>(3 - s);
  return out;
}

PrivateDataset StudyTable::ForOutcome(std::size_t index) const {
  Require(index < outcomes.size(), ErrorCode::kInvalidArgument,
          "outcome index out of range");
  const auto& y = outcomes[index];
  std::vector<std::size_t> keep;
  keep.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 1) keep.push_back(i);
  }
  std::vector<std::uint8_t> yy, aa, ss;
  std::vector<std::string> kept_ids;
  for (std::size_t i : keep) {
    yy.push_back(y[i]);
    aa.push_back(a[i]);
    ss.push_back(s[i]);
    if (!ids.empty()) kept_ids.push_back(ids[i]);
  }
  std::vector<Covariate> cov;
  for (const auto& c : covariates) {
    Covariate copy{c.name, c.kind, c.levels, {}};
    for (std::size_t i : keep) copy.values.push_back(c.values[i]);
    cov.push_back(std::move(copy));
  }
  return PrivateDataset(std::move(yy), std::move(aa), std::move(ss),
                        std::move(cov), std::move(kept_ids));
}

PrivateDataset StudyTable::ForOutcome(const std::string& name) const {
  const auto it = std::find(outcome_names.begin(), outcome_names.end(), name);
  Require(it != outcome_names.end(), ErrorCode::kInvalidArgument,
          "unknown outcome column '" + name + "'");
  return ForOutcome(static_cast<std::size_t>(it - outcome_names.begin()));
}

}  // namespace rprct

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synthctl/types.hpp"

namespace synthctl {

/// Balanced panel: one treated series and J control series over T periods.
/// Rows are periods, the first `t0` of which are pretreatment.
///
/// Immutable after construction; the constructor validates every invariant.
class Panel {
 public:
  Panel(std::vector<std::string> time_labels, Vector treated, Matrix controls, Index t0,
        std::vector<std::string> unit_names, std::string treated_name = "treated");

  Index periods() const noexcept { return treated_.size(); }
  Index units() const noexcept { return controls_.cols(); }
  Index t0() const noexcept { return t0_; }
  Index post_periods() const noexcept { return periods() - t0_; }

  const std::vector<std::string>& time_labels() const noexcept { return time_labels_; }
  const std::vector<std::string>& unit_names() const noexcept { return unit_names_; }
  const std::string& treated_name() const noexcept { return treated_name_; }
  const Vector& treated() const noexcept { return treated_; }
  const Matrix& controls() const noexcept { return controls_; }

  auto treated_pre() const { return treated_.head(t0_); }
  auto treated_post() const { return treated_.tail(post_periods()); }
  auto controls_pre() const { return controls_.topRows(t0_); }
  auto controls_post() const { return controls_.bottomRows(post_periods()); }

  /// Panel with control `unit` promoted to treated and the original treated
  /// series dropped. Used for in-space placebos.
  Panel placebo(Index unit) const;

 private:
  std::vector<std::string> time_labels_;
  Vector treated_;
  Matrix controls_;
  Index t0_;
  std::vector<std::string> unit_names_;
  std::string treated_name_;
};

/// Pretreatment and post-treatment blocks. Column 0 is the treated unit,
/// columns 1..J the controls (same order as the panel).
struct PanelSplit {
  Matrix pre;
  Matrix post;
};

struct PanelDiagnostics {
  Index units = 0;
  Index periods = 0;
  Index t0 = 0;
  double treated_mean = 0.0;
  double treated_std = 0.0;
  Vector control_means;
  Vector control_stds;
  std::vector<Index> zero_variance;  // controls with pretreatment variance < 1e-12
};

inline constexpr double kZeroVarianceThreshold = 1e-12;

/// Reads a panel CSV. Column 1 holds the time label; `treated_column` names
/// the treated series; every other column becomes a control in file order.
Panel load_panel_csv(const std::filesystem::path& path, const std::string& treated_column,
                     Index t0);

/// Same parser over an in-memory document. `source` is used in messages.
Panel parse_panel_csv(const std::string& text, const std::string& treated_column, Index t0,
                      const std::string& source = "<memory>");

PanelSplit split(const Panel& panel);

PanelDiagnostics diagnose(const Panel& panel);

/// Indices of controls whose pretreatment sample variance is below the
/// zero-variance threshold.
std::vector<Index> zero_variance_controls(const Panel& panel);

}  // namespace synthctl

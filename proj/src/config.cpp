#include "ppn/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "ppn/angles.hpp"

namespace ppn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v)) {
      throw std::invalid_argument("");
    }
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key +
                                "': " + value);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument("");
    }
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for '" + key +
                                "': " + value);
  }
}

// start:stop:step, endpoints inclusive (up to rounding slop on the last step).
std::vector<double> parse_range(const std::string& key, const std::string& value) {
  const auto c1 = value.find(':');
  const auto c2 = value.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw std::invalid_argument("config: '" + key +
                                "' expects start:stop:step, got: " + value);
  }
  const double start = parse_double(key, trim(value.substr(0, c1)));
  const double stop = parse_double(key, trim(value.substr(c1 + 1, c2 - c1 - 1)));
  const double step = parse_double(key, trim(value.substr(c2 + 1)));
  if (!(step > 0.0) || stop < start) {
    throw std::invalid_argument("config: empty or descending range for '" + key +
                                "': " + value);
  }
  const auto count =
      static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    values.push_back(start + static_cast<double>(k) * step);
  }
  return values;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "v_p") {
    cfg.vehicle.v_p = parse_double(key, value);
  } else if (key == "r0") {
    cfg.vehicle.r0 = parse_double(key, value);
  } else if (key == "theta0_deg") {
    cfg.vehicle.theta0 = deg_to_rad(parse_double(key, value));
  } else if (key == "dt") {
    cfg.integrator.dt = parse_double(key, value);
  } else if (key == "r_capture") {
    cfg.integrator.r_capture = parse_double(key, value);
  } else if (key == "t_max") {
    cfg.integrator.t_max = parse_double(key, value);
  } else if (key == "alpha_p0_grid") {
    cfg.grid.alpha_p0_deg = parse_range(key, value);
  } else if (key == "alpha_pf_grid") {
    cfg.grid.alpha_pf_des_deg = parse_range(key, value);
  } else if (key == "n_f_grid") {
    cfg.grid.n_f = parse_range(key, value);
  } else if (key == "n_ori_step") {
    cfg.grid.n_ori_step = parse_double(key, value);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint32_t>(parse_int(key, value));
  } else if (key == "epochs_gain") {
    cfg.epochs_gain = parse_int(key, value);
  } else if (key == "epochs_pair") {
    cfg.epochs_pair = parse_int(key, value);
  } else if (key == "learning_rate") {
    cfg.learning_rate = parse_double(key, value);
  } else if (key == "split_fraction") {
    cfg.split_fraction = parse_double(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) {
    throw std::runtime_error("config: cannot open " + path.string());
  }
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not a key=value pair in " + path.string());
    }
    try {
      apply_config_entry(cfg, trim(stripped.substr(0, eq)),
                         trim(stripped.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (line " +
                                  std::to_string(line_no) + " of " +
                                  path.string() + ")");
    }
  }
  return cfg;
}

}  // namespace ppn

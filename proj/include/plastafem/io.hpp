#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "plastafem/adaptivity.hpp"
#include "plastafem/diagnostics.hpp"

namespace plastafem {

inline constexpr std::string_view kTraceHeader = "level,n_elements,n_dofs,eta_sq,energy,n_marked,wall_ms";

/// %.17g, so a double survives a text round trip.
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const AdaptTrace& trace);
std::string trace_to_csv(const AdaptTrace& trace);
/// Throws ArgumentError on a wrong header or malformed row.
AdaptTrace read_trace_csv(std::istream& in);
AdaptTrace trace_from_csv(const std::string& text);

/// JSON text of the report (keys sorted, two-space indentation).
std::string report_to_json(const AxiomReport& report);

/// Mesh snapshot; marked elements are shaded.
std::string mesh_to_svg(const Mesh& mesh, const std::vector<std::size_t>& marked = {});

struct RateSeries {
    std::string label;
    std::vector<double> n;
    std::vector<double> value;
};

/// Log-log plot of the given series with a reference slope -1/2 line.
std::string rate_plot_svg(const std::vector<RateSeries>& series, const std::string& x_label);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace plastafem

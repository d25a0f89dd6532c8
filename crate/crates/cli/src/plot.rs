//! Tool-agnostic plot descriptions: one command per line, `#` comments.

use std::io::{self, Write};
use std::path::Path;

use chaos_stein::montecarlo::{format_float, ScalingStudy};

pub fn simulate_script(w: &mut dyn Write, data: &Path) -> io::Result<()> {
    writeln!(w, "# standardized counts against the standard normal")?;
    writeln!(w, "data {}", data.display())?;
    writeln!(w, "figure ecdf")?;
    writeln!(w, "xlabel standardized count")?;
    writeln!(w, "ylabel cumulative probability")?;
    writeln!(w, "ecdf column standardized label empirical")?;
    writeln!(w, "function normal_cdf range -4 4 label N(0,1)")?;
    writeln!(w, "figure histogram")?;
    writeln!(w, "histogram column standardized bins 60 density")?;
    writeln!(w, "function normal_pdf range -4 4 label N(0,1)")?;
    Ok(())
}

pub fn scaling_script(w: &mut dyn Write, data: &Path, study: &ScalingStudy) -> io::Result<()> {
    writeln!(w, "# Kolmogorov distance against n along p = c n^-alpha")?;
    writeln!(w, "data {}", data.display())?;
    writeln!(w, "skip_rows_where n == fit")?;
    writeln!(w, "figure scaling")?;
    writeln!(w, "xscale log")?;
    writeln!(w, "yscale log")?;
    writeln!(w, "xlabel n")?;
    writeln!(w, "ylabel distance")?;
    writeln!(w, "points x n y dk_hat yerr dkw_radius label empirical")?;
    writeln!(w, "line x n y exp(-(bound_parts_log[0] + bound_parts_log[1]) / 2) label bound")?;
    writeln!(
        w,
        "annotate fitted slope {} predicted slope {}",
        format_float(study.fitted_slope),
        format_float(study.predicted_slope)
    )?;
    Ok(())
}

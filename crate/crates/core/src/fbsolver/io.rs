//! CSV output of trajectories.

use std::io::{self, Write};

use super::Trajectory;

pub const TRAJECTORY_HEADER: &str = "t,s1,s2,s1dot,s2dot,u0,v0,umax,vmax";
pub const SINGLE_HEADER: &str = "t,g,gdot,w0,wmax";
pub const PROFILE_HEADER: &str = "t,xi,u,v";
pub const SINGLE_PROFILE_HEADER: &str = "t,xi,w";

#[inline]
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per scalar sample.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    if traj.species == 2 {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for s in &traj.samples {
            let row = [
                s.t,
                s.s[0],
                s.s[1],
                s.sdot[0],
                s.sdot[1],
                s.origin[0],
                s.origin[1],
                s.max[0],
                s.max[1],
            ];
            writeln!(out, "{}", row.map(num).join(","))?;
        }
    } else {
        writeln!(out, "{SINGLE_HEADER}")?;
        for s in &traj.samples {
            let row = [s.t, s.s[0], s.sdot[0], s.origin[0], s.max[0]];
            writeln!(out, "{}", row.map(num).join(","))?;
        }
    }
    Ok(())
}

/// Profile snapshots as consecutive `t,xi,u,v` blocks.
pub fn write_profiles_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let header = if traj.species == 2 {
        PROFILE_HEADER
    } else {
        SINGLE_PROFILE_HEADER
    };
    writeln!(out, "{header}")?;
    let n = traj.n_xi;
    for snap in &traj.profiles {
        for j in 0..=n {
            let xi = j as f64 / n as f64;
            let mut row = vec![num(snap.t), num(xi)];
            row.extend(snap.w.iter().map(|w| num(w[j])));
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbsolver::{run, GridSpec, InitialData};
    use crate::Params;

    #[test]
    fn csv_layout() {
        let mut g = GridSpec {
            n_xi: 32,
            dt: 1e-3,
            t_end: 0.01,
            snapshot_stride: 5,
            profile_stride: 100,
        };
        g.profile_stride = 100;
        let traj = run(
            &Params::default(),
            &InitialData::cosine(2.0, 2.0, 1.0, 1.0),
            &g,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines.len(), 1 + traj.samples.len());
        assert_eq!(lines[1].split(',').count(), 9);
        let t_last: f64 = lines
            .last()
            .unwrap()
            .split(',')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(t_last, traj.last().t);

        let mut buf = Vec::new();
        write_profiles_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(PROFILE_HEADER));
        // first and last profiles always present
        assert_eq!(text.lines().count(), 1 + 2 * 33);
    }
}

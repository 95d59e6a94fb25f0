//! Triangular fundamental diagram and the Lax-Hopf link demand and supply.

use super::{CumulativeCurve, LinkState};
use crate::error::{Error, Result};
use crate::network::Link;
use crate::scalar::Scalar;

/// `f(rho)`: `v rho` up to the critical density, `-w (rho - rho_jam)` above.
pub fn fundamental_flow<T: Scalar>(link: &Link<T>, rho: T) -> Result<T> {
    if !(rho >= T::zero() && rho <= link.jam_density) {
        return Err(Error::Domain(format!(
            "density {rho} on link {} (jam density {})",
            link.id, link.jam_density
        )));
    }
    Ok(if rho <= link.critical_density {
        link.free_speed * rho
    } else {
        -link.wave_speed * (rho - link.jam_density)
    })
}

fn check_loaded<T: Scalar>(curve: &CumulativeCurve<T>, t: T) -> Result<()> {
    let loaded = curve.last_time();
    // half a step of slack absorbs rounding in `t0 + k dt`
    if t > loaded + curve.dt() * T::lit(0.5) {
        return Err(Error::Sequencing { requested: t.as_f64(), loaded: loaded.as_f64() });
    }
    Ok(())
}

/// Demand (sending flow) of `link` over `[t, t + dt]`.
///
/// Free-flow branch (`N_up(t - L/v) = N_down(t)` within `eps`): the inflow
/// trace `f_in(t - L/v)` over one step, capped at `C`. The step count is
/// taken as `N_up(t + dt - L/v) - N_down(t)` so that a sub-tolerance
/// remainder is flushed instead of lingering. Otherwise the link discharges
/// a queue and the demand is `C`.
pub fn link_demand<T: Scalar>(state: &LinkState<T>, link: &Link<T>, t: T, eps: T) -> Result<T> {
    check_loaded(&state.down, t)?;
    let lag = t - link.free_flow_time();
    if state.up.at(lag) <= state.down.at(t) + eps {
        let dt = state.up.dt();
        Ok(((state.up.at(lag + dt) - state.down.at(t)) / dt).max(T::zero()).min(link.capacity))
    } else {
        Ok(link.capacity)
    }
}

/// Supply (receiving flow) of `link` over `[t, t + dt]`.
///
/// Jammed entrance (`N_up(t) = N_down(t - L/w) + rho_jam L` within `eps`):
/// the outflow trace `f_out(t - L/w)`, capped at `C`, with the step count
/// read as `N_down(t + dt - L/w) + rho_jam L - N_up(t)`. Otherwise `C`.
pub fn link_supply<T: Scalar>(state: &LinkState<T>, link: &Link<T>, t: T, eps: T) -> Result<T> {
    check_loaded(&state.up, t)?;
    let lag = t - link.backward_time();
    if state.up.at(t) + eps >= state.down.at(lag) + link.storage() {
        let dt = state.down.dt();
        let room = state.down.at(lag + dt) + link.storage() - state.up.at(t);
        Ok((room / dt).max(T::zero()).min(link.capacity))
    } else {
        Ok(link.capacity)
    }
}

//! Sam-aided adversaries and the environments they run in.

use crate::circuit::Program;
use crate::error::Error;
use crate::oracle::{OracleAccess, OracleError, OracleName, World};
use crate::sam::{SamOracle, SamQuery};

/// Early exit from an adversary run.
#[derive(Debug, Clone, PartialEq)]
pub enum Interrupt {
    /// A partial view met an unknown `pi_n` query at this input.
    Halt(u64),
    /// A monitor recovered the preimage.
    Found(u64),
    Fail(Error),
}

impl From<Error> for Interrupt {
    fn from(e: Error) -> Self {
        Interrupt::Fail(e)
    }
}

pub type Step<T> = std::result::Result<T, Interrupt>;

/// What an adversary can call: the oracles (eval-only) and Sam.
pub trait SamAccess {
    fn oracle(&mut self, name: OracleName, x: u64) -> Step<u64>;
    fn sam(&mut self, q: SamQuery) -> Step<u64>;
}

/// A deterministic Sam-aided algorithm trying to invert `pi_n` on `y`.
pub trait Adversary: Send + Sync {
    fn name(&self) -> String;
    fn n(&self) -> u32;
    fn run(&self, y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>>;

    /// Programs the adversary hands to Sam must be gate programs for the
    /// decoder; adversaries may declare this up front.
    fn gate_only(&self) -> bool {
        true
    }
}

/// Live oracles plus a recording Sam instance.
pub struct LiveEnv<'a> {
    pub world: &'a mut World,
    pub sam: &'a mut SamOracle,
}

impl<'a> LiveEnv<'a> {
    pub fn new(world: &'a mut World, sam: &'a mut SamOracle) -> Self {
        LiveEnv { world, sam }
    }
}

impl SamAccess for LiveEnv<'_> {
    fn oracle(&mut self, name: OracleName, x: u64) -> Step<u64> {
        Ok(self.sam.direct(&mut self.world.adversary(), name, x)?)
    }

    fn sam(&mut self, q: SamQuery) -> Step<u64> {
        Ok(self.sam.query(&mut self.world.adversary(), q)?)
    }
}

/// The hit monitor: after every Sam answer `w` to `(., ., C_next)` it evaluates
/// `C_next(w)` itself and stops as soon as a `pi_n` gate outputs `y`. Its own
/// evaluations are recorded as direct calls.
pub struct MonitorEnv<'a> {
    pub live: LiveEnv<'a>,
    pub n: u32,
    pub y: u64,
    /// Sam-call position at which the preimage was found.
    pub found_at: Option<usize>,
    sam_index: usize,
}

impl<'a> MonitorEnv<'a> {
    pub fn new(live: LiveEnv<'a>, n: u32, y: u64) -> Self {
        MonitorEnv { live, n, y, found_at: None, sam_index: 0 }
    }
}

impl SamAccess for MonitorEnv<'_> {
    fn oracle(&mut self, name: OracleName, x: u64) -> Step<u64> {
        self.live.oracle(name, x)
    }

    fn sam(&mut self, q: SamQuery) -> Step<u64> {
        let c_next: Program = q.c_next.clone();
        let w = self.live.sam(q)?;
        let idx = self.sam_index;
        self.sam_index += 1;
        let mut calls = Vec::new();
        c_next
            .eval_observed(w, &mut self.live.world.adversary(), |c| calls.push(*c))
            .map_err(Error::from)?;
        let target = OracleName::Perm(self.n as u8);
        let mut found = None;
        for c in calls {
            self.live.sam.record_direct(c.oracle, c.input, c.output);
            if found.is_none() && c.oracle == target && c.output == self.y {
                found = Some(c.input);
            }
        }
        if let Some(x) = found {
            self.found_at = Some(idx);
            return Err(Interrupt::Found(x));
        }
        Ok(w)
    }
}

/// Runs an adversary against live oracles; `Ok(None)` when it gives up.
pub fn run_live(adv: &dyn Adversary, y: u64, world: &mut World, sam: &mut SamOracle) -> crate::Result<Option<u64>> {
    let mut env = LiveEnv::new(world, sam);
    match adv.run(y, &mut env) {
        Ok(x) => Ok(x),
        Err(Interrupt::Fail(e)) => Err(e),
        Err(other) => Err(Error::Internal(format!("unexpected interrupt in live run: {other:?}"))),
    }
}

struct EnvOracle<'a> {
    env: &'a mut dyn SamAccess,
    interrupt: Option<Interrupt>,
}

impl OracleAccess for EnvOracle<'_> {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        match self.env.oracle(name, x) {
            Ok(y) => Ok(y),
            Err(i) => {
                self.interrupt = Some(i);
                Err(OracleError::Unavailable(name))
            }
        }
    }
}

/// Evaluates `prog` on `x`, routing its oracle calls through `env` as direct
/// calls of the caller.
pub fn eval_via(env: &mut dyn SamAccess, prog: &Program, x: u64) -> Step<u64> {
    let mut o = EnvOracle { env, interrupt: None };
    let r = prog.eval_plain(x, &mut o);
    if let Some(i) = o.interrupt {
        return Err(i);
    }
    r.map_err(|e| Interrupt::Fail(e.into()))
}

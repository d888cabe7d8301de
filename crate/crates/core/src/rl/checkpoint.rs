//! Binary checkpoint container.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes   "FRNTCKPT"
//! version      u32       1
//! meta_len     u32
//! meta         meta_len bytes of UTF-8 JSON: {"td3": <Td3Config>, "run": <run config>}
//! step         u64       environment steps taken when saved
//! updates      u64       TD3 update calls performed
//! net_count    u32       6
//! per network (actor, actor_target, critic1, critic2, critic1_target, critic2_target):
//!   name_len   u32, name bytes
//!   size_count u32, sizes u32 * size_count
//!   act tags   u8 * (size_count - 1)     0 = relu, 1 = tanh, 2 = linear
//!   param_len  u64, params f64 * param_len   (per layer: weights inputs x outputs row-major, then bias)
//! opt_count    u32       3
//! per optimizer (actor, critic1, critic2):
//!   name_len   u32, name bytes
//!   lr, beta1, beta2, eps   f64 * 4
//!   t          u64
//!   len        u64, m f64 * len, v f64 * len
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde_json::Value;

use super::adam::Adam;
use super::mlp::{Activation, Mlp};
use super::td3::{Td3Agent, Td3Config};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FRNTCKPT";
pub const VERSION: u32 = 1;

const NET_NAMES: [&str; 6] = [
    "actor",
    "actor_target",
    "critic1",
    "critic2",
    "critic1_target",
    "critic2_target",
];
const OPT_NAMES: [&str; 3] = ["actor", "critic1", "critic2"];

#[derive(Debug, Clone)]
pub struct Checkpoint {
    /// Run configuration the agent was trained with.
    pub run: Value,
    pub step: u64,
    pub agent: Td3Agent,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn bytes(&mut self, b: &[u8]) -> std::io::Result<()> {
        self.inner.write_all(b)
    }
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn str(&mut self, s: &str) -> std::io::Result<()> {
        self.u32(s.len() as u32)?;
        self.bytes(s.as_bytes())
    }
    fn f64s(&mut self, vals: &[f64]) -> std::io::Result<()> {
        self.u64(vals.len() as u64)?;
        let mut buf = Vec::with_capacity(vals.len() * 8);
        for v in vals {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.bytes(&buf)
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.exact::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.exact()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.exact()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.exact()?))
    }
    fn vec(&mut self, len: usize) -> Result<Vec<u8>> {
        if len > 1 << 30 {
            return Err(bad(format!("implausible block length {len}")));
        }
        let mut b = vec![0u8; len];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
        Ok(b)
    }
    fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.vec(len)?).map_err(|e| bad(format!("invalid UTF-8: {e}")))
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let len = self.u64()? as usize;
        let raw = self.vec(len.checked_mul(8).ok_or_else(|| bad("length overflow"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        self.write_inner(out)
            .map_err(|e| bad(format!("write failed: {e}")))
    }

    fn write_inner<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = Writer { inner: out };
        w.bytes(MAGIC)?;
        w.u32(VERSION)?;
        let meta = serde_json::json!({ "td3": self.agent.cfg, "run": self.run });
        w.str(&meta.to_string())?;
        w.u64(self.step)?;
        w.u64(self.agent.updates)?;
        let a = &self.agent;
        let nets = [
            &a.actor,
            &a.actor_target,
            &a.critic1,
            &a.critic2,
            &a.critic1_target,
            &a.critic2_target,
        ];
        w.u32(nets.len() as u32)?;
        for (name, net) in NET_NAMES.iter().zip(nets) {
            w.str(name)?;
            w.u32(net.sizes().len() as u32)?;
            for s in net.sizes() {
                w.u32(*s as u32)?;
            }
            for act in net.activations() {
                w.u8(act.tag())?;
            }
            w.f64s(net.params())?;
        }
        let opts = [&a.actor_opt, &a.critic1_opt, &a.critic2_opt];
        w.u32(opts.len() as u32)?;
        for (name, opt) in OPT_NAMES.iter().zip(opts) {
            w.str(name)?;
            w.f64(opt.lr)?;
            w.f64(opt.beta1)?;
            w.f64(opt.beta2)?;
            w.f64(opt.eps)?;
            w.u64(opt.t)?;
            w.f64s(&opt.m)?;
            w.f64s(&opt.v)?;
        }
        w.inner.flush()
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut r = Reader { inner: input };
        if &r.exact::<8>()? != MAGIC {
            return Err(bad("not a checkpoint (bad magic)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let meta: Value = serde_json::from_str(&r.str()?)?;
        let cfg: Td3Config = serde_json::from_value(
            meta.get("td3").cloned().ok_or_else(|| bad("metadata lacks td3 config"))?,
        )?;
        let run = meta.get("run").cloned().unwrap_or(Value::Null);
        let step = r.u64()?;
        let updates = r.u64()?;

        let net_count = r.u32()? as usize;
        if net_count != NET_NAMES.len() {
            return Err(bad(format!("expected 6 networks, found {net_count}")));
        }
        let mut nets = Vec::with_capacity(net_count);
        for expected in NET_NAMES {
            let name = r.str()?;
            if name != expected {
                return Err(bad(format!("expected network `{expected}`, found `{name}`")));
            }
            let count = r.u32()? as usize;
            if !(2..=64).contains(&count) {
                return Err(bad(format!("implausible layer count {count}")));
            }
            let sizes = (0..count)
                .map(|_| r.u32().map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            let acts = (0..count - 1)
                .map(|_| {
                    let tag = r.u8()?;
                    Activation::from_tag(tag).ok_or_else(|| bad(format!("unknown activation {tag}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let params = r.f64s()?;
            nets.push(Mlp::from_parts(&sizes, &acts, params)?);
        }

        let opt_count = r.u32()? as usize;
        if opt_count != OPT_NAMES.len() {
            return Err(bad(format!("expected 3 optimizers, found {opt_count}")));
        }
        let mut opts = Vec::with_capacity(opt_count);
        for expected in OPT_NAMES {
            let name = r.str()?;
            if name != expected {
                return Err(bad(format!("expected optimizer `{expected}`, found `{name}`")));
            }
            let lr = r.f64()?;
            let beta1 = r.f64()?;
            let beta2 = r.f64()?;
            let eps = r.f64()?;
            let t = r.u64()?;
            let m = r.f64s()?;
            let v = r.f64s()?;
            opts.push(Adam {
                lr,
                beta1,
                beta2,
                eps,
                t,
                m,
                v,
            });
        }

        let mut nets = nets.into_iter();
        let mut next = || nets.next().expect("six networks");
        let (actor, actor_target, critic1, critic2, critic1_target, critic2_target) =
            (next(), next(), next(), next(), next(), next());
        let mut opts = opts.into_iter();
        let (actor_opt, critic1_opt, critic2_opt) = (
            opts.next().expect("three optimizers"),
            opts.next().expect("three optimizers"),
            opts.next().expect("three optimizers"),
        );

        let obs_dim = actor.input_dim();
        let act_dim = actor.output_dim();
        for (label, net) in [("critic1", &critic1), ("critic2", &critic2)] {
            if net.input_dim() != obs_dim + act_dim || net.output_dim() != 1 {
                return Err(bad(format!("{label} shape does not match the actor")));
            }
        }
        if actor_target.sizes() != actor.sizes()
            || critic1_target.sizes() != critic1.sizes()
            || critic2_target.sizes() != critic2.sizes()
        {
            return Err(bad("target network shape differs from its online network"));
        }
        for (opt, net) in [
            (&actor_opt, &actor),
            (&critic1_opt, &critic1),
            (&critic2_opt, &critic2),
        ] {
            if opt.m.len() != net.param_count() || opt.v.len() != net.param_count() {
                return Err(bad("optimizer moment length differs from its network"));
            }
        }

        Ok(Self {
            run,
            step,
            agent: Td3Agent {
                cfg,
                obs_dim,
                act_dim,
                actor,
                actor_target,
                critic1,
                critic2,
                critic1_target,
                critic2_target,
                actor_opt,
                critic1_opt,
                critic2_opt,
                updates,
                grads: Default::default(),
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

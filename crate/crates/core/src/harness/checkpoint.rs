use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learner::LearnerState;
use crate::optimizer::OptimizerRunState;

const MAGIC: &str = "seqteach-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Something that can be checkpointed, tagged with a kind string.
pub trait Checkpointable: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Checkpointable for OptimizerRunState {
    const KIND: &'static str = "optimizer";
}

impl Checkpointable for LearnerState {
    const KIND: &'static str = "learner";
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialize `state` as a header line
/// `seqteach-checkpoint <kind> v<version> <payload-bytes> <sha256>` followed
/// by the JSON payload.
pub fn encode_checkpoint<T: Checkpointable>(state: &T) -> Result<String> {
    let payload = serde_json::to_string(state)?;
    let digest = hex(&Sha256::digest(payload.as_bytes()));
    Ok(format!(
        "{MAGIC} {} v{CHECKPOINT_VERSION} {} {digest}\n{payload}",
        T::KIND,
        payload.len()
    ))
}

pub fn decode_checkpoint<T: Checkpointable>(text: &str) -> Result<T> {
    let (header, payload) = text.split_once('\n').ok_or(Error::Checksum)?;
    let fields: Vec<&str> = header.split(' ').collect();
    let [magic, kind, version, len, digest] = fields[..] else {
        return Err(Error::Checksum);
    };
    if magic != MAGIC {
        return Err(Error::Checksum);
    }
    let found_version: u32 = version
        .strip_prefix('v')
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Checksum)?;
    if kind != T::KIND || found_version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            expected: T::KIND,
            expected_version: CHECKPOINT_VERSION,
            found: kind.to_string(),
            found_version,
        });
    }
    if len.parse::<usize>().ok() != Some(payload.len())
        || hex(&Sha256::digest(payload.as_bytes())) != digest
    {
        return Err(Error::Checksum);
    }
    Ok(serde_json::from_str(payload)?)
}

/// Write atomically: a sibling temporary file renamed over `path`.
pub fn save_checkpoint<T: Checkpointable>(state: &T, path: &Path) -> Result<()> {
    let text = encode_checkpoint(state)?;
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Checkpointable>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&text)
}

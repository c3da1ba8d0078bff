//! GET/DATA message model with PID accumulation on the forward path,
//! stripping on the return path, and the canonical digest over
//! (SID, PID prefix) that logging routers store and later verify.

use thiserror::Error;

use crate::hashing::hash128;
use crate::topology::PathId;
use crate::Tick;

/// Opaque 128-bit identifier of a content item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ServiceId(pub u128);

/// Opaque 128-bit identifier of a consumer or provider node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub u128);

/// 128-bit digest of a (SID, PID prefix) pair under a fixed run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(u128);

impl Digest {
    pub fn from_u128(value: u128) -> Self {
        Digest(value)
    }

    pub fn as_u128(self) -> u128 {
        self.0
    }

    pub fn low64(self) -> u64 {
        self.0 as u64
    }

    pub fn high64(self) -> u64 {
        (self.0 >> 64) as u64
    }
}

/// Whether a simulated packet originates from legitimate traffic or from
/// the attacker. Bookkeeping only; routers never see this field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundTruth {
    Legitimate,
    Attack,
}

/// Content request. `pids` grows by one entry per inter-domain hop on the
/// forward path.
#[derive(Debug, Clone)]
pub struct GetMessage {
    pub sid: ServiceId,
    pub consumer: NodeId,
    pub pids: Vec<PathId>,
    pub issue_tick: Tick,
}

impl GetMessage {
    pub fn new(sid: ServiceId, consumer: NodeId, issue_tick: Tick) -> Self {
        GetMessage {
            sid,
            consumer,
            pids: Vec::new(),
            issue_tick,
        }
    }

    /// Appends the path identifier of the outgoing inter-domain link.
    pub fn append_pid(&mut self, pid: PathId) {
        self.pids.push(pid);
    }
}

/// Content response. `pids` shrinks by one entry per hop on the return
/// path; the stripped entry selects the next hop.
#[derive(Debug, Clone)]
pub struct DataMessage {
    pub sid: ServiceId,
    pub pids: Vec<PathId>,
    pub ground_truth: GroundTruth,
    pub size_bytes: u32,
}

impl DataMessage {
    /// Builds the response to a GET, reusing its accumulated PID list.
    pub fn reply_to(get: &GetMessage, size_bytes: u32) -> Self {
        DataMessage {
            sid: get.sid,
            pids: get.pids.clone(),
            ground_truth: GroundTruth::Legitimate,
            size_bytes,
        }
    }

    /// Removes and returns the last PID. The remaining prefix is what the
    /// router hashes for verification.
    pub fn strip_last(&mut self) -> Result<PathId, MessageError> {
        self.pids.pop().ok_or(MessageError::EmptyPidList)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MessageError {
    /// A DATA message arrived with no PIDs left to strip. Malformed;
    /// the engine drops it and counts it separately.
    #[error("DATA message has an empty PID list")]
    EmptyPidList,
}

/// Canonical digest of a GET message as seen by one router: the SID plus
/// the PID prefix the message carried when it arrived there.
///
/// Serialization is fixed: 16 SID bytes, a 32-bit big-endian prefix
/// length, then each PID as 8 big-endian bytes. The length field keeps an
/// empty prefix distinct from a prefix holding the all-zero PID.
pub fn digest_of(sid: ServiceId, prefix: &[PathId], run_seed: u64) -> Digest {
    let mut bytes = Vec::with_capacity(16 + 4 + 8 * prefix.len());
    bytes.extend_from_slice(&sid.0.to_be_bytes());
    bytes.extend_from_slice(&(prefix.len() as u32).to_be_bytes());
    for pid in prefix {
        bytes.extend_from_slice(&pid.0.to_be_bytes());
    }
    let (lo, hi) = hash128(&bytes, run_seed);
    Digest(((hi as u128) << 64) | lo as u128)
}

//! C ABI for the rwrange workbench: opaque range handles, status codes,
//! and byte-buffer ownership helpers. Every function is safe to call with
//! null pointers (it reports `RWR_STATUS_NULL_POINTER` instead of
//! crashing), and every allocation has a matching `_free` function.

use std::os::raw::c_char;

use rwrange::codec::{decode_range, encode_range, RangeBitStream};
use rwrange::extractor::{default_templates, extract_bits};
use rwrange::geometry::{inner_boundary, range_of};
use rwrange::rng::derive_stream;
use rwrange::walk::{simulate_walk, LatticePoint};
use rwrange::RangeSet;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwrStatus {
    RwrStatusOk = 0,
    RwrStatusNullPointer = 1,
    RwrStatusInvalidArgument = 2,
    RwrStatusEncodeError = 3,
    RwrStatusDecodeError = 4,
}

/// Opaque handle to a d=2 walk range together with its step count.
pub struct RwrRange {
    range: RangeSet,
    n: u64,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rwr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Simulate an n-step d=2 walk from the given seed/stream pair and return
/// its range. The caller owns the handle and must release it with
/// `rwr_range_free`.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_simulate(
    n: u64,
    master_seed: u64,
    stream_id: u64,
    out: *mut *mut RwrRange,
) -> RwrStatus {
    if out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    let mut rng = derive_stream(master_seed, stream_id);
    let traj = match simulate_walk(2, n, &mut rng) {
        Ok(t) => t,
        Err(_) => return RwrStatus::RwrStatusInvalidArgument,
    };
    let handle = Box::new(RwrRange { range: range_of(&traj), n });
    *out = Box::into_raw(handle);
    RwrStatus::RwrStatusOk
}

/// Release a range handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_free(range: *mut RwrRange) {
    if !range.is_null() {
        drop(Box::from_raw(range));
    }
}

/// Number of distinct visited cells.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_size(range: *const RwrRange, out: *mut u64) -> RwrStatus {
    if range.is_null() || out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    *out = (*range).range.len() as u64;
    RwrStatus::RwrStatusOk
}

/// Number of inner-boundary cells.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_boundary_size(
    range: *const RwrRange,
    out: *mut u64,
) -> RwrStatus {
    if range.is_null() || out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    *out = inner_boundary(&(*range).range).len() as u64;
    RwrStatus::RwrStatusOk
}

/// Walk length the range was generated (or decoded) with.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_steps(range: *const RwrRange, out: *mut u64) -> RwrStatus {
    if range.is_null() || out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    *out = (*range).n;
    RwrStatus::RwrStatusOk
}

/// Whether the cell (x, y) was visited.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_contains(
    range: *const RwrRange,
    x: i64,
    y: i64,
    out: *mut bool,
) -> RwrStatus {
    if range.is_null() || out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    *out = (*range).range.contains(&LatticePoint::xy(x, y));
    RwrStatus::RwrStatusOk
}

fn export_bytes(bytes: Vec<u8>, out_bytes: *mut *mut u8, out_len: *mut usize) -> RwrStatus {
    let boxed = bytes.into_boxed_slice();
    let len = boxed.len();
    unsafe {
        *out_len = len;
        *out_bytes = Box::into_raw(boxed) as *mut u8;
    }
    RwrStatus::RwrStatusOk
}

/// Release a byte buffer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rwr_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// Losslessly encode the range. The buffer is owned by the caller and
/// must be released with `rwr_bytes_free`.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_encode(
    range: *const RwrRange,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> RwrStatus {
    if range.is_null() || out_bytes.is_null() || out_len.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    let r = &*range;
    match encode_range(&r.range, r.n) {
        Ok(stream) => export_bytes(stream.to_bytes(), out_bytes, out_len),
        Err(_) => RwrStatus::RwrStatusEncodeError,
    }
}

/// Decode an encoded range buffer into a new handle.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_decode(
    bytes: *const u8,
    len: usize,
    out: *mut *mut RwrRange,
) -> RwrStatus {
    if bytes.is_null() || out.is_null() {
        return RwrStatus::RwrStatusNullPointer;
    }
    let slice = std::slice::from_raw_parts(bytes, len);
    let stream = match RangeBitStream::from_bytes(slice) {
        Ok(s) => s,
        Err(_) => return RwrStatus::RwrStatusDecodeError,
    };
    match decode_range(&stream) {
        Ok((range, n)) => {
            *out = Box::into_raw(Box::new(RwrRange { range, n }));
            RwrStatus::RwrStatusOk
        }
        Err(_) => RwrStatus::RwrStatusDecodeError,
    }
}

/// Extract bits from the range with the default mirror templates, packed
/// MSB-first into bytes (zero padded). `out_bit_count` receives the exact
/// number of bits; the buffer must be released with `rwr_bytes_free`.
#[no_mangle]
pub unsafe extern "C" fn rwr_range_extract_bits(
    range: *const RwrRange,
    out_bytes: *mut *mut u8,
    out_byte_len: *mut usize,
    out_bit_count: *mut usize,
) -> RwrStatus {
    if range.is_null() || out_bytes.is_null() || out_byte_len.is_null() || out_bit_count.is_null()
    {
        return RwrStatus::RwrStatusNullPointer;
    }
    let result = match extract_bits(&(*range).range, &default_templates()) {
        Ok(r) => r,
        Err(_) => return RwrStatus::RwrStatusInvalidArgument,
    };
    let mut packed = vec![0u8; result.bits.len().div_ceil(8)];
    for (i, &bit) in result.bits.iter().enumerate() {
        if bit {
            packed[i / 8] |= 1 << (7 - i % 8);
        }
    }
    *out_bit_count = result.bits.len();
    export_bytes(packed, out_bytes, out_byte_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn version_is_a_c_string() {
        let v = rwr_version();
        assert!(!v.is_null());
        let s = unsafe { std::ffi::CStr::from_ptr(v) }.to_str().unwrap();
        assert!(!s.is_empty());
    }

    #[test]
    fn simulate_encode_decode_roundtrip() {
        unsafe {
            let mut handle: *mut RwrRange = ptr::null_mut();
            assert_eq!(rwr_range_simulate(256, 42, 0, &mut handle), RwrStatus::RwrStatusOk);
            let mut size = 0u64;
            assert_eq!(rwr_range_size(handle, &mut size), RwrStatus::RwrStatusOk);
            assert!(size >= 1);

            let mut contains = false;
            assert_eq!(
                rwr_range_contains(handle, 0, 0, &mut contains),
                RwrStatus::RwrStatusOk
            );
            assert!(contains, "origin is always visited");

            let mut bytes: *mut u8 = ptr::null_mut();
            let mut len = 0usize;
            assert_eq!(
                rwr_range_encode(handle, &mut bytes, &mut len),
                RwrStatus::RwrStatusOk
            );
            assert!(len > 0);

            let mut decoded: *mut RwrRange = ptr::null_mut();
            assert_eq!(rwr_range_decode(bytes, len, &mut decoded), RwrStatus::RwrStatusOk);
            let mut decoded_size = 0u64;
            assert_eq!(rwr_range_size(decoded, &mut decoded_size), RwrStatus::RwrStatusOk);
            assert_eq!(decoded_size, size);
            let mut n = 0u64;
            assert_eq!(rwr_range_steps(decoded, &mut n), RwrStatus::RwrStatusOk);
            assert_eq!(n, 256);

            rwr_bytes_free(bytes, len);
            rwr_range_free(decoded);
            rwr_range_free(handle);
        }
    }

    #[test]
    fn null_pointers_are_reported_not_fatal() {
        unsafe {
            assert_eq!(
                rwr_range_simulate(8, 1, 0, ptr::null_mut()),
                RwrStatus::RwrStatusNullPointer
            );
            assert_eq!(
                rwr_range_size(ptr::null(), ptr::null_mut()),
                RwrStatus::RwrStatusNullPointer
            );
            assert_eq!(
                rwr_range_decode(ptr::null(), 0, ptr::null_mut()),
                RwrStatus::RwrStatusNullPointer
            );
            rwr_range_free(ptr::null_mut());
            rwr_bytes_free(ptr::null_mut(), 0);
        }
    }

    #[test]
    fn garbage_bytes_fail_to_decode() {
        unsafe {
            let junk = [0u8; 7];
            let mut out: *mut RwrRange = ptr::null_mut();
            assert_eq!(
                rwr_range_decode(junk.as_ptr(), junk.len(), &mut out),
                RwrStatus::RwrStatusDecodeError
            );
        }
    }

    #[test]
    fn extraction_reports_exact_bit_count() {
        unsafe {
            let mut handle: *mut RwrRange = ptr::null_mut();
            assert_eq!(rwr_range_simulate(4096, 7, 1, &mut handle), RwrStatus::RwrStatusOk);
            let mut bytes: *mut u8 = ptr::null_mut();
            let (mut byte_len, mut bit_count) = (0usize, 0usize);
            assert_eq!(
                rwr_range_extract_bits(handle, &mut bytes, &mut byte_len, &mut bit_count),
                RwrStatus::RwrStatusOk
            );
            assert_eq!(byte_len, bit_count.div_ceil(8));
            rwr_bytes_free(bytes, byte_len);
            rwr_range_free(handle);
        }
    }
}

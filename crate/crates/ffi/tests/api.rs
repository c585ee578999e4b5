use std::ffi::{CStr, CString};
use std::ptr;

use qrecovery_ffi::*;

fn counterexample_state() -> *mut QrState {
    // ½|000⟩⟨000| + ⅛|1⟩⟨1| ⊗ id
    let mut re = vec![0.0; 64];
    re[0] = 0.5;
    for k in 4..8 {
        re[k * 8 + k] = 0.125;
    }
    let dims = [2usize, 2, 2];
    let mut out = ptr::null_mut();
    let status = unsafe { qr_state_new(dims.as_ptr(), 3, re.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(status, QrStatus::Ok);
    out
}

fn last_error() -> String {
    let p = qr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(qr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn petz_report_through_handles() {
    let rho = counterexample_state();
    unsafe {
        assert_eq!(qr_state_dim(rho), 8);
        assert_eq!(qr_state_num_systems(rho), 3);
        let mut bc = ptr::null_mut();
        assert_eq!(
            qr_state_marginal(rho, [1usize, 2].as_ptr(), 2, &mut bc),
            QrStatus::Ok
        );
        let mut t = ptr::null_mut();
        assert_eq!(qr_petz_transpose(bc, &mut t), QrStatus::Ok);
        let (mut din, mut dout) = (0, 0);
        assert_eq!(qr_channel_dims(t, &mut din, &mut dout), QrStatus::Ok);
        assert_eq!((din, dout), (2, 4));
        let mut ok = 0;
        assert_eq!(qr_channel_is_tpcp(t, &mut ok), QrStatus::Ok);
        assert_eq!(ok, 1);

        let (mut ore, mut oim) = ([0.0; 16], [0.0; 16]);
        let x = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(
            qr_channel_apply(
                t,
                x.as_ptr(),
                ptr::null(),
                ore.as_mut_ptr(),
                oim.as_mut_ptr()
            ),
            QrStatus::Ok
        );
        assert!((ore[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((ore[5] - 1.0 / 6.0).abs() < 1e-12);

        let mut rep = QrRecoveryReport::default();
        assert_eq!(qr_recovery_report(rho, t, 0, &mut rep), QrStatus::Ok);
        assert!(rep.fid.sqrt() < 0.9696);
        assert!(rep.dm_bits.is_nan());
        assert!(rep.delta_thm1 >= 0.0);

        let mut opt = QrOptimum::default();
        let mut w = ptr::null_mut();
        assert_eq!(qr_fidelity_of_recovery(rho, &mut opt, &mut w), QrStatus::Ok);
        assert!(opt.value > 0.9829);
        assert!(!w.is_null());
        qr_channel_free(w);
        qr_channel_free(t);
        qr_state_free(bc);
        qr_state_free(rho);
    }
}

#[test]
fn averaged_and_rotated_maps() {
    let rho = counterexample_state();
    unsafe {
        let mut bc = ptr::null_mut();
        qr_state_marginal(rho, [1usize, 2].as_ptr(), 2, &mut bc);
        let mut a = ptr::null_mut();
        assert_eq!(
            qr_averaged_petz(bc, 41, 8.0, QrWeights::Cosh, &mut a),
            QrStatus::Ok
        );
        let mut r = ptr::null_mut();
        assert_eq!(qr_rotated_petz(bc, 1.5, &mut r), QrStatus::Ok);
        let mut bad = ptr::null_mut();
        assert_eq!(
            qr_averaged_petz(bc, 0, 8.0, QrWeights::Uniform, &mut bad),
            QrStatus::InvalidArgument
        );
        assert!(bad.is_null());
        qr_channel_free(a);
        qr_channel_free(r);
        qr_state_free(bc);
        qr_state_free(rho);
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    unsafe {
        let mut out = ptr::null_mut();
        let dims = [2usize];
        let not_psd = [1.5, 0.0, 0.0, -0.5];
        assert_eq!(
            qr_state_new(dims.as_ptr(), 1, not_psd.as_ptr(), ptr::null(), &mut out),
            QrStatus::NotPsd
        );
        assert!(out.is_null());
        assert!(last_error().contains("positive semidefinite"));

        assert_eq!(
            qr_state_new(ptr::null(), 1, not_psd.as_ptr(), ptr::null(), &mut out),
            QrStatus::NullPointer
        );
        assert!(last_error().contains("dims"));

        let mut v = 0.0;
        assert_eq!(qr_cmi(ptr::null(), &mut v), QrStatus::NullPointer);

        let missing = CString::new("/nonexistent/state.json").unwrap();
        assert_eq!(qr_state_load_json(missing.as_ptr(), &mut out), QrStatus::Io);

        let qubit = [0.5, 0.0, 0.0, 0.5];
        let mut q = ptr::null_mut();
        assert_eq!(
            qr_state_new(dims.as_ptr(), 1, qubit.as_ptr(), ptr::null(), &mut q),
            QrStatus::Ok
        );
        let mut t = ptr::null_mut();
        assert_eq!(qr_petz_transpose(q, &mut t), QrStatus::InvalidArgument);
        qr_state_free(q);
        qr_state_free(ptr::null_mut());
        qr_channel_free(ptr::null_mut());
    }
}

#[test]
fn files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let sp = CString::new(dir.path().join("s.json").to_str().unwrap()).unwrap();
    let cp = CString::new(dir.path().join("c.json").to_str().unwrap()).unwrap();
    let rho = counterexample_state();
    unsafe {
        assert_eq!(qr_state_save_json(rho, sp.as_ptr()), QrStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(qr_state_load_json(sp.as_ptr(), &mut back), QrStatus::Ok);
        let mut f = 0.0;
        assert_eq!(qr_fidelity(rho, back, &mut f), QrStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);
        let mut i = 0.0;
        assert_eq!(qr_cmi(back, &mut i), QrStatus::Ok);
        assert!(i > 0.0);

        let mut bc = ptr::null_mut();
        qr_state_marginal(rho, [1usize, 2].as_ptr(), 2, &mut bc);
        let mut t = ptr::null_mut();
        qr_petz_transpose(bc, &mut t);
        assert_eq!(qr_channel_save_json(t, cp.as_ptr()), QrStatus::Ok);
        let mut t2 = ptr::null_mut();
        assert_eq!(qr_channel_load_json(cp.as_ptr(), &mut t2), QrStatus::Ok);
        let mut ok = 0;
        qr_channel_is_tpcp(t2, &mut ok);
        assert_eq!(ok, 1);
        for p in [rho, back, bc] {
            qr_state_free(p);
        }
        qr_channel_free(t);
        qr_channel_free(t2);
    }
}

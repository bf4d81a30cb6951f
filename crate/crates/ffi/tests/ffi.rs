use std::ffi::{CStr, CString};
use std::ptr;

use anb_ffi::*;

fn opts(algorithm: AnbAlgorithm) -> AnbRunOptions {
    AnbRunOptions {
        algorithm,
        n_max: 0,
        verify: false,
        no_early_stop: false,
    }
}

fn generate(family: &str, n: usize, seed: u64) -> *mut AnbGraph {
    let name = CString::new(family).unwrap();
    let mut g = ptr::null_mut();
    let status = unsafe { anb_graph_generate(name.as_ptr(), n, seed, &mut g) };
    assert_eq!(status, AnbStatus::Ok);
    g
}

fn last_error() -> String {
    let p = anb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn final_count(r: *const AnbResult, node: usize) -> String {
    let mut needed = 0;
    let status = unsafe { anb_result_final_count(r, node, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(status, AnbStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed];
    let status =
        unsafe { anb_result_final_count(r, node, buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(status, AnbStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn counts_a_triangle() {
    let g = generate("complete", 3, 0);
    unsafe {
        assert_eq!(anb_graph_node_count(g), 3);
        assert_eq!(anb_graph_edge_count(g), 3);
        assert_eq!(anb_graph_diameter(g), 1);
        let mut r = ptr::null_mut();
        let mut o = opts(AnbAlgorithm::Anb);
        o.verify = true;
        assert_eq!(anb_run(g, &o, &mut r), AnbStatus::Ok);
        assert!(anb_last_error_message().is_null());
        assert!(anb_result_correct(r));
        let mut m = AnbMetrics::default();
        assert_eq!(anb_result_metrics(r, &mut m), AnbStatus::Ok);
        assert_eq!((m.n, m.t_reduction, m.t_total), (3, 2, 3));
        assert_eq!((m.m1, m.m2, m.m3, m.m4, m.m6), (3, 3, 3, 0, 9));
        assert_eq!(m.residue_count, 3);
        assert_eq!(m.id_broadcasts, ANB_NONE);
        assert_eq!(final_count(r, 2), "3/1");
        anb_result_free(r);
        anb_graph_free(g);
    }
}

#[test]
fn baselines_through_the_abi() {
    let edges: [usize; 4] = [0, 1, 1, 2];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(
            anb_graph_from_edges(3, edges.as_ptr(), 2, &mut g),
            AnbStatus::Ok
        );
        let mut r = ptr::null_mut();
        assert_eq!(
            anb_run(g, &opts(AnbAlgorithm::AllToAll), &mut r),
            AnbStatus::Ok
        );
        let mut m = AnbMetrics::default();
        anb_result_metrics(r, &mut m);
        assert_eq!((m.t_total, m.id_broadcasts), (2, 9));
        anb_result_free(r);
        let mut r = ptr::null_mut();
        assert_eq!(
            anb_run(g, &opts(AnbAlgorithm::SingleTree), &mut r),
            AnbStatus::Ok
        );
        assert!(anb_result_correct(r));
        anb_result_free(r);
        anb_graph_free(g);
    }
}

#[test]
fn summation() {
    let g = generate("path", 4, 0);
    let nums = [1i64, 1, 3, 2];
    let dens = [2i64, 3, 4, 1];
    unsafe {
        let mut r = ptr::null_mut();
        let status = anb_run_sum(
            g,
            nums.as_ptr(),
            dens.as_ptr(),
            4,
            &opts(AnbAlgorithm::Anb),
            &mut r,
        );
        assert_eq!(status, AnbStatus::Ok);
        assert!(anb_result_correct(r));
        for i in 0..4 {
            assert_eq!(final_count(r, i), "43/12");
        }
        anb_result_free(r);

        let mut r = ptr::null_mut();
        let status = anb_run_sum(
            g,
            nums.as_ptr(),
            dens.as_ptr(),
            3,
            &opts(AnbAlgorithm::Anb),
            &mut r,
        );
        assert_eq!(status, AnbStatus::InvalidArgument);
        assert!(r.is_null());
        assert!(last_error().contains("one value per node"));
        anb_graph_free(g);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        let name = CString::new("hypercube").unwrap();
        assert_eq!(
            anb_graph_generate(name.as_ptr(), 5, 0, &mut g),
            AnbStatus::InvalidArgument
        );
        assert!(last_error().contains("hypercube"));
        assert_eq!(
            anb_graph_generate(ptr::null(), 5, 0, &mut g),
            AnbStatus::NullPointer
        );

        let edges: [usize; 2] = [0, 1];
        assert_eq!(
            anb_graph_from_edges(3, edges.as_ptr(), 1, &mut g),
            AnbStatus::Graph
        );
        assert!(last_error().contains("disconnected"));
        assert_eq!(
            anb_graph_from_edges(0, ptr::null(), 0, &mut g),
            AnbStatus::Graph
        );

        let path = CString::new("/nonexistent/graph.txt").unwrap();
        assert_eq!(anb_graph_load(path.as_ptr(), &mut g), AnbStatus::Graph);
        assert!(g.is_null());

        let g = generate("ring", 5, 0);
        let mut r = ptr::null_mut();
        let mut o = opts(AnbAlgorithm::Anb);
        o.n_max = 2;
        assert_eq!(anb_run(g, &o, &mut r), AnbStatus::InvalidArgument);
        let mut o = opts(AnbAlgorithm::AllToAll);
        o.verify = true;
        assert_eq!(anb_run(g, &o, &mut r), AnbStatus::InvalidArgument);
        assert_eq!(anb_run(g, ptr::null(), &mut r), AnbStatus::NullPointer);
        assert_eq!(
            anb_run(ptr::null(), &opts(AnbAlgorithm::Anb), &mut r),
            AnbStatus::NullPointer
        );
        assert_eq!(
            anb_run(g, &opts(AnbAlgorithm::Anb), ptr::null_mut()),
            AnbStatus::NullPointer
        );

        assert_eq!(anb_run(g, &opts(AnbAlgorithm::Anb), &mut r), AnbStatus::Ok);
        let mut needed = 0;
        assert_eq!(
            anb_result_final_count(r, 9, ptr::null_mut(), 0, &mut needed),
            AnbStatus::InvalidArgument
        );
        anb_result_free(r);
        anb_graph_free(g);

        assert_eq!(anb_graph_node_count(ptr::null()), 0);
        assert!(!anb_result_correct(ptr::null()));
        anb_graph_free(ptr::null_mut());
        anb_result_free(ptr::null_mut());
    }
}

#[test]
fn loads_edge_list_files() {
    let dir = std::env::temp_dir().join(format!("anb-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("square.txt");
    std::fs::write(&file, "0 1\n1 2\n2 3\n3 0\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(anb_graph_load(path.as_ptr(), &mut g), AnbStatus::Ok);
        assert_eq!(anb_graph_node_count(g), 4);
        assert_eq!(anb_graph_diameter(g), 2);
        anb_graph_free(g);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(anb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

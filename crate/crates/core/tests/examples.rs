//! Runs every program under examples/ so they stay working.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                let _ = main();
            }
        }
    };
}

example!(table_walkthrough);
example!(train_and_predict);
example!(oracle_check);
example!(sign_test);

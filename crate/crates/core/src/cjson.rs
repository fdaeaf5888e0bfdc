//! Serde helpers rendering complex scalars as `{"re": .., "im": ..}`.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::Serializer;

pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &c.re)?;
    st.serialize_field("im", &c.im)?;
    st.end()
}

pub mod vec3 {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Complex64; 3], s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Repr {
            re: f64,
            im: f64,
        }
        let mut seq = s.serialize_seq(Some(3))?;
        for c in v {
            seq.serialize_element(&Repr { re: c.re, im: c.im })?;
        }
        seq.end()
    }
}

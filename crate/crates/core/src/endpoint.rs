use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::SourceError;

/// A stream endpoint: where records are read from or statements written to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    /// `tcp://host:port`
    Tcp(String),
    /// `ws://host:port/path`, kept as the full URL.
    Ws(String),
    /// `file:path` or `file://path`; relative paths are kept relative.
    File(PathBuf),
    /// `stdin` / `stdin:`; doubles as `stdout` when used as a sink.
    Stdio,
}

impl Endpoint {
    pub fn scheme(&self) -> &'static str {
        match self {
            Endpoint::Tcp(_) => "tcp",
            Endpoint::Ws(_) => "ws",
            Endpoint::File(_) => "file",
            Endpoint::Stdio => "stdin",
        }
    }
}

fn host_port(rest: &str, original: &str) -> Result<String, SourceError> {
    let authority = rest.split('/').next().unwrap_or_default();
    let (host, port) = authority
        .rsplit_once(':')
        .ok_or_else(|| SourceError::InvalidEndpoint(original.to_string()))?;
    if host.is_empty() || port.parse::<u16>().is_err() {
        return Err(SourceError::InvalidEndpoint(original.to_string()));
    }
    Ok(authority.to_string())
}

impl FromStr for Endpoint {
    type Err = SourceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if matches!(s, "stdin" | "stdin:" | "stdin://" | "stdout" | "stdout:" | "-") {
            return Ok(Endpoint::Stdio);
        }
        let (scheme, rest) = s
            .split_once(':')
            .ok_or_else(|| SourceError::InvalidEndpoint(s.to_string()))?;
        match scheme.to_ascii_lowercase().as_str() {
            "tcp" => {
                let rest = rest
                    .strip_prefix("//")
                    .ok_or_else(|| SourceError::InvalidEndpoint(s.to_string()))?;
                Ok(Endpoint::Tcp(host_port(rest, s)?))
            }
            "ws" => {
                let rest = rest
                    .strip_prefix("//")
                    .ok_or_else(|| SourceError::InvalidEndpoint(s.to_string()))?;
                host_port(rest, s)?;
                Ok(Endpoint::Ws(s.to_string()))
            }
            "file" => {
                let path = rest.strip_prefix("//").unwrap_or(rest);
                if path.is_empty() {
                    return Err(SourceError::InvalidEndpoint(s.to_string()));
                }
                Ok(Endpoint::File(PathBuf::from(path)))
            }
            other => Err(SourceError::UnsupportedScheme(other.to_string())),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Tcp(addr) => write!(f, "tcp://{addr}"),
            Endpoint::Ws(url) => f.write_str(url),
            Endpoint::File(path) => write!(f, "file:{}", path.display()),
            Endpoint::Stdio => f.write_str("stdin"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_supported_schemes() {
        assert_eq!(
            "tcp://localhost:9000".parse::<Endpoint>().unwrap(),
            Endpoint::Tcp("localhost:9000".into())
        );
        assert_eq!(
            "ws://data-streamer:9001".parse::<Endpoint>().unwrap(),
            Endpoint::Ws("ws://data-streamer:9001".into())
        );
        assert_eq!(
            "file:./speed.ndjson".parse::<Endpoint>().unwrap(),
            Endpoint::File("./speed.ndjson".into())
        );
        assert_eq!(
            "file:///tmp/x.csv".parse::<Endpoint>().unwrap(),
            Endpoint::File("/tmp/x.csv".into())
        );
        assert_eq!("stdin".parse::<Endpoint>().unwrap(), Endpoint::Stdio);
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(matches!(
            "kafka://broker:9092".parse::<Endpoint>(),
            Err(SourceError::UnsupportedScheme(_))
        ));
        assert!("tcp://nohost".parse::<Endpoint>().is_err());
        assert!("tcp://host:notaport".parse::<Endpoint>().is_err());
        assert!("ws:/x".parse::<Endpoint>().is_err());
        assert!("file:".parse::<Endpoint>().is_err());
        assert!("plain".parse::<Endpoint>().is_err());
    }
}

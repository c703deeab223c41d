use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{
    AutoregressiveOracle, ConditionalOracle, ContextGenerativeOracle, ContextTemplate, CstpError,
    MembershipOracle, Prob,
};

pub const DEFAULT_ORACLE_TIMEOUT: Duration = Duration::from_secs(30);

/// Oracle served by a child process over a line protocol.
///
/// Each request is one tab-separated line:
///
/// ```text
/// CAP conditional <term> <prefix> <suffix>
/// CAP likelihood  <term> <prefix> <suffix>
/// CAP prior       <term>
/// CAP membership  <term> <prefix> <suffix>
/// CAP next        <token> <history>
/// ```
///
/// where token lists are space-joined. The child answers each request with
/// one line: a decimal probability, `ERR unknown <term>`, or `ERR <message>`.
pub struct SubprocessOracle {
    inner: Mutex<Channel>,
    timeout: Duration,
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<std::io::Result<String>>,
    // a late reply after a timeout would answer the wrong request
    desynced: bool,
}

impl SubprocessOracle {
    pub fn spawn(mut command: Command, timeout: Duration) -> Result<Self, CstpError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| CstpError::External(format!("spawn failed: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, replies) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(SubprocessOracle {
            inner: Mutex::new(Channel {
                child,
                stdin,
                replies,
                desynced: false,
            }),
            timeout,
        })
    }

    fn ask(&self, fields: &[&str], term: &str) -> Result<Prob, CstpError> {
        let mut channel = self
            .inner
            .lock()
            .map_err(|_| CstpError::External("oracle channel poisoned".into()))?;
        if channel.desynced {
            return Err(CstpError::External("oracle stopped answering earlier".into()));
        }
        let request = fields.join("\t");
        writeln!(channel.stdin, "CAP\t{request}")
            .and_then(|_| channel.stdin.flush())
            .map_err(|e| CstpError::External(format!("write failed: {e}")))?;
        let reply = match channel.replies.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(CstpError::External(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                channel.desynced = true;
                return Err(CstpError::Timeout(self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(CstpError::External("oracle process exited".into()))
            }
        };
        let reply = reply.trim();
        if let Some(err) = reply.strip_prefix("ERR") {
            let err = err.trim();
            return Err(match err.strip_prefix("unknown") {
                Some(_) => CstpError::UnknownTerm(term.to_string()),
                None => CstpError::External(err.to_string()),
            });
        }
        let p: f64 = reply
            .parse()
            .map_err(|_| CstpError::External(format!("malformed reply `{reply}`")))?;
        Prob::new(p)
    }
}

impl Drop for SubprocessOracle {
    fn drop(&mut self) {
        if let Ok(channel) = self.inner.get_mut() {
            let _ = channel.child.kill();
            let _ = channel.child.wait();
        }
    }
}

impl ConditionalOracle for SubprocessOracle {
    fn conditional(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        let (p, s) = (context.prefix().join(" "), context.suffix().join(" "));
        self.ask(&["conditional", term, &p, &s], term)
    }
}

impl ContextGenerativeOracle for SubprocessOracle {
    fn likelihood(&self, context: &ContextTemplate, term: &str) -> Result<Prob, CstpError> {
        let (p, s) = (context.prefix().join(" "), context.suffix().join(" "));
        self.ask(&["likelihood", term, &p, &s], term)
    }

    fn prior(&self, term: &str) -> Result<Prob, CstpError> {
        self.ask(&["prior", term], term)
    }
}

impl MembershipOracle for SubprocessOracle {
    fn membership(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        let (p, s) = (context.prefix().join(" "), context.suffix().join(" "));
        self.ask(&["membership", term, &p, &s], term)
    }
}

impl AutoregressiveOracle for SubprocessOracle {
    fn next_prob(&self, prefix: &[String], token: &str) -> Result<Prob, CstpError> {
        self.ask(&["next", token, &prefix.join(" ")], token)
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::cstp::{prefer_direct, Winner};

    fn shell(script: &str) -> Command {
        let mut c = Command::new("sh");
        c.arg("-c").arg(script);
        c
    }

    #[test]
    fn round_trip() {
        let script = r#"while IFS="$(printf '\t')" read -r tag cap term rest; do
            case "$term" in
              good) echo 0.75 ;;
              bad) echo 0.25 ;;
              neg) echo -1 ;;
              *) echo "ERR unknown $term" ;;
            esac
        done"#;
        let o = SubprocessOracle::spawn(shell(script), Duration::from_secs(5)).unwrap();
        let c = ContextTemplate::parse("a _ b").unwrap();
        let p = prefer_direct(&o, &c, "good", "bad").unwrap();
        assert_eq!(p.winner, Winner::First);
        assert!((p.score_first - 0.75f64.ln()).abs() < 1e-12);
        assert_eq!(
            o.conditional("zz", &c),
            Err(CstpError::UnknownTerm("zz".into()))
        );
        assert!(matches!(o.conditional("neg", &c), Err(CstpError::OracleContract(_))));
    }

    #[test]
    fn times_out() {
        let o = SubprocessOracle::spawn(shell("sleep 5"), Duration::from_millis(100)).unwrap();
        let c = ContextTemplate::parse("a _").unwrap();
        assert!(matches!(o.conditional("x", &c), Err(CstpError::Timeout(_))));
    }
}

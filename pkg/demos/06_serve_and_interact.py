"""
Driving the HTTP service
========================

The interactive client talks to a small HTTP API: ingest a snapshot, fetch
its layout, then open a session and send commands. Sessions are optimistic:
every command names the version it was computed against, and a stale
version is rejected so two clients cannot silently clobber each other.
This demo starts the real server in a subprocess and walks that loop with
nothing but the standard library.
"""

import json
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

from convscope import emit_snapshot, fixture_net, make_dataset, serialize_snapshot

PORT = 8901
BASE = f"http://127.0.0.1:{PORT}/v1"


def call(url, body=None, raw=None):
    data = raw if raw is not None else (
        json.dumps(body).encode() if body is not None else None)
    request = urllib.request.Request(
        url, data=data,
        headers={"Content-Type": "application/json"} if data else {})
    with urllib.request.urlopen(request) as response:
        return json.load(response)


with tempfile.TemporaryDirectory() as workdir:
    server = subprocess.Popen(
        [sys.executable, "-m", "convscope.cli", "serve",
         "--port", str(PORT), "--data-dir", workdir],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        for _ in range(50):  # wait for the port to come up
            time.sleep(0.2)
            try:
                urllib.request.urlopen(f"{BASE}/snapshots/none/layout")
            except urllib.error.HTTPError:
                break  # 404 means the server is answering
            except urllib.error.URLError:
                continue

        net = fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)
        snapshot = emit_snapshot(net, make_dataset(net, 4, seed=1), "http-demo")
        uploaded = call(f"{BASE}/snapshots",
                        raw=serialize_snapshot(snapshot).encode())
        print("ingested snapshot:", uploaded["id"])

        layout = call(f"{BASE}/snapshots/{uploaded['id']}/layout")
        print("layout columns:", [c["layer"] for c in layout["columns"]])

        session = call(f"{BASE}/sessions", {"snapshotId": uploaded["id"]})
        print(f"session {session['id']} at version {session['version']}")

        # drag a neuron into a fresh cluster
        first = session["document"]["columns"][0]
        neuron = session["document"]["clusterNodes"][first["clusters"][0]]["members"][0]
        updated = call(f"{BASE}/sessions/{session['id']}/commands",
                       {"command": {"type": "moveNeuron",
                                    "neuron": neuron, "target": "new"},
                        "expectedVersion": 0})
        print(f"moved {neuron}: version {updated['version']}, "
              f"{first['layer']} now has "
              f"{len(updated['document']['columns'][0]['clusters'])} clusters")

        # replaying the same expectedVersion is a conflict, not a double apply
        try:
            call(f"{BASE}/sessions/{session['id']}/commands",
                 {"command": {"type": "moveNeuron",
                              "neuron": neuron, "target": "new"},
                  "expectedVersion": 0})
        except urllib.error.HTTPError as err:
            print("stale replay rejected with", err.code)

        undone = call(f"{BASE}/sessions/{session['id']}/undo")
        same = undone["document"] == session["document"]
        print(f"undo -> version {undone['version']}, "
              f"document matches the original: {same}")
    finally:
        server.terminate()
        server.wait()

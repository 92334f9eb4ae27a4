# Independent reference values for test_scattering: plain physical-frame DOP853 in scipy.
# Run: python3 tests/oracles/scattering_samples.py
import numpy as np
from scipy.integrate import solve_ivp
eps,w,k=0.01,0.5,8.0
sig,rho=0.1,2*np.pi
tau=2*sig*rho
def gQ(y):
    r2=y@y/w**2
    if r2>=1: return np.zeros(2)
    return -2*eps*(k+1)/w**2*(1-r2)**k*y
def perp(u): return np.array([u[1],-u[0]])
def rhs(t,s):
    x,xi=s[:2],s[2:]
    g=gQ(x+perp(xi)); h=gQ(x-perp(xi))
    dx=xi/(2*np.pi*(xi@xi))+0.5*(-perp(g)+perp(h))
    dxi=-0.5*(g+h)
    return np.concatenate([dx,dxi])
for th in [0.0,0.7]:
  for a in [0.0,0.2,-0.35]:
    d=np.array([-np.sin(th),np.cos(th)]); ac=np.array([np.cos(th),np.sin(th)])
    x0=a*ac-(rho/2/np.pi)*d; xi0=sig*d
    s=solve_ivp(rhs,[0,tau],np.concatenate([x0,xi0]),method='DOP853',rtol=1e-13,atol=1e-15,max_step=1e-3)
    X=s.y[:,-1]; xe=x0+tau*xi0/(2*np.pi*sig**2)
    S=X-np.concatenate([xe,xi0])
    print(f"{{{th}, {a}, {S[0]:.15e}, {S[1]:.15e}, {S[2]:.15e}, {S[3]:.15e}}},")
